//! Machine-readable verification report.

use serde::Serialize;

/// One checked identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    /// Acceptance criterion the identity belongs to (1-13).
    pub criterion: u8,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub warnings: usize,
    /// The identity is checked in a form known not to hold; it must fail.
    pub expected_fail: bool,
}

impl Record {
    /// Does this record come out the way the suite says it should?
    pub fn as_expected(&self) -> bool {
        self.pass != self.expected_fail && self.warnings == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub tool_version: String,
    pub q: f64,
    pub alpha: f64,
    pub n_index: u32,
    pub beta: f64,
    pub abs_v: f64,
    pub n_min: i32,
    pub n_max: i32,
    pub nonnegative_only: bool,
    pub series_tol: f64,
    pub seed: u64,
    pub safe_core: (i32, i32),
    pub c_v: f64,
    pub kernel_sup_bound: f64,
    pub far_field_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub environment: Environment,
    pub records: Vec<Record>,
    /// Fitted `e` in `pairing / ||f||^2 = q^e` over the Plancherel trials.
    pub plancherel_q_power_exponent: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn new(environment: Environment, records: Vec<Record>, exponent: f64) -> Self {
        let pass = records.iter().all(Record::as_expected);
        Self {
            environment,
            records,
            plancherel_q_power_exponent: exponent,
            pass,
        }
    }

    pub fn record(&self, name: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str, pass: bool, warnings: usize, expected_fail: bool) -> Record {
        Record {
            name: name.into(),
            criterion: 1,
            residual: 0.0,
            tolerance: 1.0,
            pass,
            warnings,
            expected_fail,
        }
    }

    fn env() -> Environment {
        Environment {
            tool_version: "0".into(),
            q: 0.5,
            alpha: 0.5,
            n_index: 1,
            beta: 1.5,
            abs_v: 0.5,
            n_min: -5,
            n_max: 60,
            nonnegative_only: false,
            series_tol: 1e-17,
            seed: 1,
            safe_core: (-5, 0),
            c_v: 1.0,
            kernel_sup_bound: 2.0,
            far_field_terms: 4,
        }
    }

    #[test]
    fn expectation_combines_pass_flag_and_warnings() {
        assert!(record("a", true, 0, false).as_expected());
        assert!(record("a", false, 0, true).as_expected());
        assert!(!record("a", false, 0, false).as_expected());
        assert!(!record("a", true, 0, true).as_expected());
        assert!(!record("a", true, 2, false).as_expected());
    }

    #[test]
    fn global_flag_requires_every_record() {
        let ok = VerifyReport::new(
            env(),
            vec![record("a", true, 0, false), record("b", false, 0, true)],
            0.0,
        );
        assert!(ok.pass);
        let bad = VerifyReport::new(
            env(),
            vec![record("a", true, 0, false), record("b", false, 0, false)],
            0.0,
        );
        assert!(!bad.pass);
        assert_eq!(bad.record("b").map(|r| r.pass), Some(false));
        assert!(bad.record("c").is_none());
    }

    #[test]
    fn json_has_records_environment_and_exponent() {
        let r = VerifyReport::new(env(), vec![record("a", true, 0, false)], 1e-13);
        let text = r.to_json();
        assert!(text.ends_with("}\n"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["records"][0]["name"], "a");
        assert_eq!(v["environment"]["safe_core"], serde_json::json!([-5, 0]));
        assert_eq!(v["plancherel_q_power_exponent"], 1e-13);
        assert_eq!(v["pass"], true);
    }
}
