//! Field serialization.
//!
//! JSON: `{"header": {"n", "resolution", "periods", "kind"}, "values": [...]}`
//! with values in row-major grid order (axis `x^1` slowest). One-forms store
//! their `2n` components contiguously per point; metrics store `n×n` row-major
//! blocks with each complex entry as `re, im`.
//!
//! Binary: magic `CYFD`, then little-endian `u32` version (1), `n`,
//! `resolution`, kind code, `2n` `f64` periods, `u64` value count, and the
//! `f64` values in the same order as JSON.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chart::GridChart;
use super::field::{OneFormField, ScalarField};
use super::metric::HermitianMetricField;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CYFD";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    OneForm,
    Metric,
}

impl FieldKind {
    fn code(self) -> u32 {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::OneForm => 1,
            FieldKind::Metric => 2,
        }
    }

    fn from_code(c: u32) -> Result<Self> {
        match c {
            0 => Ok(FieldKind::Scalar),
            1 => Ok(FieldKind::OneForm),
            2 => Ok(FieldKind::Metric),
            _ => Err(Error::Format(format!("unknown field kind code {c}"))),
        }
    }

    fn values_per_point(self, n: usize) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::OneForm => 2 * n,
            FieldKind::Metric => 2 * n * n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub n: usize,
    pub resolution: usize,
    pub periods: Vec<f64>,
    pub kind: FieldKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDocument {
    pub header: FieldHeader,
    pub values: Vec<f64>,
}

impl FieldDocument {
    fn new(chart: &GridChart, kind: FieldKind, values: Vec<f64>) -> Self {
        Self {
            header: FieldHeader {
                n: chart.complex_dim(),
                resolution: chart.resolution(),
                periods: chart.periods().to_vec(),
                kind,
            },
            values,
        }
    }

    pub fn from_scalar(f: &ScalarField) -> Self {
        Self::new(f.chart(), FieldKind::Scalar, f.values().to_vec())
    }

    pub fn from_one_form(f: &OneFormField) -> Self {
        Self::new(f.chart(), FieldKind::OneForm, f.components().to_vec())
    }

    pub fn from_metric(m: &HermitianMetricField) -> Self {
        let values = m.matrices().iter().flat_map(|c| [c.re, c.im]).collect();
        Self::new(m.chart(), FieldKind::Metric, values)
    }

    pub fn chart(&self) -> Result<GridChart> {
        let h = &self.header;
        let chart = GridChart::with_periods(h.n, h.resolution, h.periods.clone())?;
        let expected = chart.len() * h.kind.values_per_point(h.n);
        if self.values.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} values, found {}",
                self.values.len()
            )));
        }
        Ok(chart)
    }

    fn expect_kind(&self, kind: FieldKind) -> Result<GridChart> {
        if self.header.kind != kind {
            return Err(Error::Format(format!(
                "expected a {kind:?} field, found {:?}",
                self.header.kind
            )));
        }
        self.chart()
    }

    pub fn to_scalar(&self) -> Result<ScalarField> {
        let chart = self.expect_kind(FieldKind::Scalar)?;
        ScalarField::new(&chart, self.values.clone())
    }

    pub fn to_one_form(&self) -> Result<OneFormField> {
        let chart = self.expect_kind(FieldKind::OneForm)?;
        OneFormField::new(&chart, self.values.clone())
    }

    pub fn to_metric(&self) -> Result<HermitianMetricField> {
        let chart = self.expect_kind(FieldKind::Metric)?;
        let data = self.values.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        HermitianMetricField::new(&chart, data)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("field documents always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [
            VERSION,
            self.header.n as u32,
            self.header.resolution as u32,
            self.header.kind.code(),
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for p in &self.header.periods {
            w.write_all(&p.to_le_bytes())?;
        }
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut u32s = [0u32; 4];
        for v in u32s.iter_mut() {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            *v = u32::from_le_bytes(b);
        }
        let [version, n, resolution, kind] = u32s;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let read_f64 = |r: &mut dyn Read| -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let periods = (0..2 * n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let count = u64::from_le_bytes(b) as usize;
        if count > 1 << 28 {
            return Err(Error::Format("value count too large".into()));
        }
        let values = (0..count).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let doc = Self {
            header: FieldHeader {
                n: n as usize,
                resolution: resolution as usize,
                periods,
                kind: FieldKind::from_code(kind)?,
            },
            values,
        };
        doc.chart()?;
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn scalar_roundtrips_through_both_encodings(seed in 0u64..1000) {
            let chart = GridChart::new(2, 8).unwrap();
            let f = ScalarField::from_fn(&chart, |x| ((seed as f64 + 1.0) * (x[0] - 2.0 * x[3])).sin() * 1e3);
            let doc = FieldDocument::from_scalar(&f);
            let back = FieldDocument::from_json(&doc.to_json()).unwrap().to_scalar().unwrap();
            prop_assert_eq!(back.values(), f.values());
            let mut buf = Vec::new();
            doc.write_binary(&mut buf).unwrap();
            let back = FieldDocument::read_binary(&buf[..]).unwrap().to_scalar().unwrap();
            prop_assert_eq!(back.values(), f.values());
        }
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let chart = GridChart::new(2, 8).unwrap();
        let doc = FieldDocument::from_scalar(&ScalarField::zeros(&chart));
        assert!(doc.to_metric().is_err());
    }

    #[test]
    fn metric_roundtrip() {
        let chart = GridChart::new(2, 8).unwrap();
        let m = HermitianMetricField::flat(&chart, 0.5).unwrap();
        let back = FieldDocument::from_json(&FieldDocument::from_metric(&m).to_json())
            .unwrap()
            .to_metric()
            .unwrap();
        assert_eq!(back.matrices(), m.matrices());
    }
}
