use std::path::Path;

use serde::{Deserialize, Serialize};

use super::exact::Exact;
use super::{Behaviour, Scenario, SuccessMetric};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "X")]
    x: usize,
    #[serde(rename = "Y")]
    y: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(default)]
    prep_equivalences: Vec<Vec<Vec<Exact>>>,
    #[serde(default)]
    meas_equivalences: Vec<Vec<Vec<Exact>>>,
}

fn wrap(c: &[super::Class]) -> Vec<Vec<Vec<Exact>>> {
    c.iter().map(|c| c.iter().map(|d| d.iter().cloned().map(Exact).collect()).collect()).collect()
}

fn unwrap(c: Vec<Vec<Vec<Exact>>>) -> Vec<super::Class> {
    c.into_iter()
        .map(|c| c.into_iter().map(|d| d.into_iter().map(|e| e.0).collect()).collect())
        .collect()
}

/// Canonical JSON: every probability as a `"num/den"` string.
pub fn scenario_to_json(s: &Scenario) -> String {
    let raw = RawScenario {
        x: s.x,
        y: s.y,
        k: s.k,
        prep_equivalences: wrap(&s.prep_equivalences),
        meas_equivalences: wrap(&s.meas_equivalences),
    };
    serde_json::to_string_pretty(&raw).expect("scenario serializes")
}

/// Parse and validate a scenario document.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| Error::parse("scenario", e))?;
    let s = Scenario {
        x: raw.x,
        y: raw.y,
        k: raw.k,
        prep_equivalences: unwrap(raw.prep_equivalences),
        meas_equivalences: unwrap(raw.meas_equivalences),
    };
    s.validate().into_result()?;
    Ok(s)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    scenario_from_json(&text).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::parse(path.display().to_string(), msg),
        other => other,
    })
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario_to_json(s))?;
    Ok(())
}

pub fn load_metric(path: impl AsRef<Path>) -> Result<SuccessMetric> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

pub fn save_metric(m: &SuccessMetric, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(m).map_err(|e| Error::parse("metric", e))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Row {
    x: usize,
    y: usize,
    k: usize,
    p: f64,
}

pub fn behaviour_to_csv(b: &Behaviour) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for x in 0..b.x {
        for y in 0..b.y {
            for k in 0..b.k {
                w.serialize(Row { x, y, k, p: b.get(x, y, k) }).expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Shape is inferred from the largest indices present; every entry must be
/// listed exactly once.
pub fn behaviour_from_csv(text: &str) -> Result<Behaviour> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, r) in rdr.deserialize::<Row>().enumerate() {
        rows.push(r.map_err(|e| Error::parse(format!("behaviour row {}", i + 2), e))?);
    }
    let dim = |f: fn(&Row) -> usize| rows.iter().map(f).max().map_or(0, |m| m + 1);
    let (xs, ys, ks) = (dim(|r| r.x), dim(|r| r.y), dim(|r| r.k));
    let mut b = Behaviour::zeros(xs, ys, ks);
    let mut seen = vec![false; b.p.len()];
    for r in &rows {
        let i = b.index(r.x, r.y, r.k);
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::parse("behaviour", format!("duplicate entry ({}, {}, {})", r.x, r.y, r.k)));
        }
        b.p[i] = r.p;
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::parse("behaviour", format!("missing entry {i}")));
    }
    Ok(b)
}

pub fn load_behaviour(path: impl AsRef<Path>) -> Result<Behaviour> {
    behaviour_from_csv(&std::fs::read_to_string(path)?)
}

pub fn save_behaviour(b: &Behaviour, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, behaviour_to_csv(b))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_632, build_simplest_family, porac_metric, ratio};

    #[test]
    fn canonical_round_trip_is_bitwise() {
        let s = build_632();
        let text = scenario_to_json(&s);
        let back = scenario_from_json(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(scenario_to_json(&back), text);
        assert!(text.contains("\"1/3\""));
    }

    #[test]
    fn accepts_decimals_and_rationals() {
        let text = r#"{"X": 4, "Y": 2, "K": 2,
            "prep_equivalences": [[[0.5, 0, 0, "1/2"], [0, 0.3, "7/10", 0]]]}"#;
        let s = scenario_from_json(text).unwrap();
        assert_eq!(s, build_simplest_family(0.3).unwrap());
        assert_eq!(s.prep_equivalences[0][1][2], ratio(7, 10));
    }

    #[test]
    fn bad_sum_names_the_class() {
        let text = r#"{"X": 2, "Y": 1, "K": 2,
            "prep_equivalences": [[[1, 0], [0, 1]], [[0.5, 0.5], [0.9, 0]]]}"#;
        let e = scenario_from_json(text).unwrap_err().to_string();
        assert!(e.contains("preparation class 1, distribution 1"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = scenario_from_json("{\"X\": 2,\n \"Y\": }").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn metric_and_behaviour_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = porac_metric(2);
        save_metric(&m, dir.path().join("m.json")).unwrap();
        assert_eq!(load_metric(dir.path().join("m.json")).unwrap(), m);

        let mut b = Behaviour::zeros(2, 1, 2);
        b.p = vec![0.25, 0.75, 1.0, 0.0];
        save_behaviour(&b, dir.path().join("b.csv")).unwrap();
        assert_eq!(load_behaviour(dir.path().join("b.csv")).unwrap(), b);
    }

    #[test]
    fn metric_accepts_rational_coefficients() {
        let m: SuccessMetric =
            serde_json::from_str(r#"{"terms":[{"x":0,"y":0,"k":1,"c":"-1/4"}]}"#).unwrap();
        assert_eq!(m.terms[0].c, -0.25);
    }
}
