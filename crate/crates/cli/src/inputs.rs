//! Scenario and metric arguments: a bundled name or a JSON file.

use anyhow::{bail, Context, Result};
use ctxwb::scenario::*;

fn arg(spec: &str) -> (&str, Option<&str>) {
    match spec.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (spec, None),
    }
}

fn number<T: std::str::FromStr>(v: Option<&str>, spec: &str) -> Result<T> {
    v.with_context(|| format!("`{spec}` needs a parameter"))?
        .parse()
        .map_err(|_| anyhow::anyhow!("bad parameter in `{spec}`"))
}

/// `632`, `porac:N`, `mporac:N`, `mporac23`, `prop7`, `ncycle:N`,
/// `simplest:ALPHA`, or a path.
pub fn scenario(spec: &str) -> Result<Scenario> {
    let s = match arg(spec) {
        ("632", None) => build_632(),
        ("porac", n) => build_porac(number(n, spec)?)?,
        ("mporac", n) => build_mporac(number(n, spec)?)?,
        ("mporac23", None) => build_mporac23(),
        ("prop7", None) => build_prop7(),
        ("ncycle", n) => ncycle_scenario(number(n, spec)?)?,
        ("simplest", a) => build_simplest_family(number(a, spec)?)?,
        _ => load_scenario(spec).with_context(|| format!("reading scenario `{spec}`"))?,
    };
    s.validate().into_result()?;
    Ok(s)
}

/// `table1:I`, `porac:N`, `mporac23`, `ncycle:N`, or a path.
pub fn metric(spec: &str) -> Result<SuccessMetric> {
    Ok(match arg(spec) {
        ("table1", i) => table1_metric(number(i, spec)?)?,
        ("porac", n) => porac_metric(number(n, spec)?),
        ("mporac23", None) => mporac23_metric(),
        ("ncycle", n) => ncycle_metric(number(n, spec)?)?,
        _ => load_metric(spec).with_context(|| format!("reading metric `{spec}`"))?,
    })
}

pub fn scenario_and_metric(s: &str, m: &str) -> Result<(Scenario, SuccessMetric)> {
    let s = scenario(s)?;
    let m = metric(m)?;
    if let Err(e) = m.check_scenario(&s) {
        bail!("metric does not fit the scenario: {e}");
    }
    Ok((s, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(scenario("632").unwrap().x, 6);
        assert_eq!(scenario("porac:3").unwrap().x, 8);
        assert_eq!(scenario("simplest:0.25").unwrap().x, 4);
        assert!(scenario("porac").is_err());
        assert!(scenario("no/such/file.json").is_err());
        assert!(scenario_and_metric("632", "porac:3").is_err());
        assert!(scenario_and_metric("mporac23", "mporac23").is_ok());
    }
}
