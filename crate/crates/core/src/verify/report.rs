use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::weights::ExponentConfig;

pub const CSV_COLUMNS: [&str; 17] = [
    "experiment",
    "d",
    "p",
    "q",
    "r",
    "s",
    "alpha",
    "u",
    "p0",
    "n",
    "depth",
    "seed",
    "lhs",
    "rhs",
    "ratio",
    "reference",
    "pass",
];

/// One measured inequality: `ratio = lhs / Π rhs_components`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub cfg: ExponentConfig,
    pub n: usize,
    pub depth: u32,
    pub seed: u64,
    #[serde(with = "real")]
    pub lhs: f64,
    #[serde(with = "real")]
    pub rhs: f64,
    #[serde(with = "real")]
    pub ratio: f64,
    #[serde(with = "real_opt")]
    pub reference: Option<f64>,
    pub pass: Option<bool>,
    #[serde(with = "real_map")]
    pub rhs_components: BTreeMap<String, f64>,
    #[serde(with = "real_map")]
    pub diagnostics: BTreeMap<String, f64>,
}

/// `lhs / rhs` with a vanishing left side giving zero.
pub fn inequality_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

impl VerificationReport {
    pub fn new(
        experiment: impl Into<String>,
        cfg: ExponentConfig,
        n: usize,
        depth: u32,
        seed: u64,
        lhs: f64,
        rhs_components: BTreeMap<String, f64>,
    ) -> Self {
        let rhs = rhs_components.values().product();
        Self {
            experiment: experiment.into(),
            cfg,
            n,
            depth,
            seed,
            lhs,
            rhs,
            ratio: inequality_ratio(lhs, rhs),
            reference: None,
            pass: None,
            rhs_components,
            diagnostics: BTreeMap::new(),
        }
    }

    /// Sets the reference and derives `pass`.
    pub fn with_reference(mut self, reference: Option<f64>) -> Self {
        self.reference = reference;
        self.pass = reference.map(|c| self.ratio <= c);
        self
    }

    pub fn diagnostic(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }

    /// The experiment id up to the first `:` (suite labels follow it).
    pub fn base_id(&self) -> &str {
        self.experiment.split(':').next().unwrap_or_default()
    }

    fn csv_record(&self) -> Vec<String> {
        let c = &self.cfg;
        vec![
            self.experiment.clone(),
            c.d.to_string(),
            fmt_real(c.p),
            fmt_real(c.q),
            fmt_real(c.r),
            fmt_real(c.s),
            fmt_real(c.alpha),
            fmt_real(c.u),
            fmt_real(c.p0),
            self.n.to_string(),
            self.depth.to_string(),
            self.seed.to_string(),
            fmt_real(self.lhs),
            fmt_real(self.rhs),
            fmt_real(self.ratio),
            self.reference.map(fmt_real).unwrap_or_default(),
            match self.pass {
                Some(true) => "true".into(),
                Some(false) => "false".into(),
                None => "na".into(),
            },
        ]
    }
}

/// 17 significant digits, or `inf`/`-inf`/`nan`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// The CSV summary (header plus one row per report, LF endings).
pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in reports {
        w.write_record(r.csv_record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    let mut text = serde_json::to_string_pretty(reports).expect("reports serialize");
    text.push('\n');
    text
}

pub fn reports_from_json(text: &str) -> Result<Vec<VerificationReport>> {
    serde_json::from_str(text).map_err(|e| param(format!("malformed report document: {e}")))
}

/// Non-finite values are written as the strings `inf`, `-inf`, `nan`.
mod real {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Number(f64),
        Text(String),
    }

    impl Repr {
        pub(super) fn value<E: Error>(self) -> Result<f64, E> {
            match self {
                Repr::Number(x) => Ok(x),
                Repr::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    _ => Err(E::custom(format!("expected a number, got \"{t}\""))),
                },
            }
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::fmt_real(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Repr::deserialize(d)?.value()
    }
}

mod real_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::real::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<super::real::Repr>::deserialize(d)?
            .map(|r| r.value())
            .transpose()
    }
}

mod real_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};

    struct Entry<'a>(&'a f64);

    impl serde::Serialize for Entry<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::real::serialize(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &Entry(v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, super::real::Repr>::deserialize(d)?
            .into_iter()
            .map(|(k, r)| r.value().map(|v| (k, v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(lhs: f64, parts: &[(&str, f64)]) -> VerificationReport {
        let comps = parts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        VerificationReport::new(
            "demo:affine:constant",
            ExponentConfig::default(),
            64,
            6,
            7,
            lhs,
            comps,
        )
    }

    #[test]
    fn ratio_is_lhs_over_product() {
        let r = sample(0.5, &[("a", 2.0), ("b", 0.125)]);
        assert_eq!(r.rhs, 0.25);
        assert_eq!(r.ratio, 2.0);
        assert_eq!(r.base_id(), "demo");
        assert_eq!(sample(0.0, &[("a", 0.0)]).ratio, 0.0);
        assert!(sample(1.0, &[("a", 0.0)]).ratio.is_infinite());
        let checked = r.clone().with_reference(Some(2.0));
        assert_eq!(checked.pass, Some(true));
        assert_eq!(r.with_reference(Some(1.5)).pass, Some(false));
    }

    #[test]
    fn csv_schema() {
        let csv = reports_to_csv(&[sample(0.5, &[("a", 1.0)])]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[1].starts_with("demo:affine:constant,1,2.0000000000000000e0,"));
        assert!(lines[1].ends_with(",,na"));
        assert!(!csv.contains('\r'));
        let many: Vec<_> = (0..50).map(|i| sample(i as f64, &[("a", 1.0)])).collect();
        assert_eq!(reports_to_csv(&many).lines().count(), 51);
    }

    #[test]
    fn json_round_trip_preserves_csv() {
        let mut a = sample(1.0 / 3.0, &[("eps", 0.1), ("char", std::f64::consts::PI)]);
        a = a
            .diagnostic("blowup", f64::INFINITY)
            .with_reference(Some(0.7));
        let b = sample(f64::NAN, &[("x", 1e-300)]);
        let reports = vec![a, b];
        let text = reports_to_json(&reports);
        assert!(text.contains("\"inf\""));
        let back = reports_from_json(&text).unwrap();
        assert_eq!(reports_to_csv(&back), reports_to_csv(&reports));
        assert_eq!(reports_to_json(&back), text);
        assert!(reports_from_json("[{\"experiment\": 3}]").is_err());
    }
}
