//! On-disk formats: JSON instance and report files, CSV tables.
//!
//! Instance files look like
//!
//! ```json
//! {
//!   "divider_values": [101, 102, 103, 104, 105, 200],
//!   "prior": {"kind": "normal", "goods": [{"mean": 10, "stdev": 1}]}
//! }
//! ```
//!
//! with prior kinds `normal`, `discrete_per_good`, `joint_discrete`, and
//! `uniform01`. Unknown keys are rejected, numbers must be finite, and a
//! parsed file must validate into an [`Instance`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{CrossoverRow, DiversificationRow, RoleRow};
use crate::model::{Instance, SolveReport};
use crate::priors::{Atom, ChooserType, JointDiscretePrior, NormalMarginal, Prior};

/// Typed mirror of the instance JSON document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub divider_values: Vec<f64>,
    pub prior: PriorFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorFile {
    Normal { goods: Vec<NormalMarginal> },
    DiscretePerGood { goods: Vec<Vec<Atom>> },
    JointDiscrete { types: Vec<ChooserType> },
    Uniform01 { n: usize },
}

/// Keys allowed next to `"kind"` for each prior variant. Internally tagged
/// enums cannot use serde's `deny_unknown_fields`, so the check is explicit.
fn check_prior_keys(value: &Value) -> Result<()> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::input("\"prior\" must be an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::input("prior needs a string \"kind\""))?;
    let allowed: &[&str] = match kind {
        "normal" | "discrete_per_good" => &["kind", "goods"],
        "joint_discrete" => &["kind", "types"],
        "uniform01" => &["kind", "n"],
        other => {
            return Err(Error::input(format!(
                "unknown prior kind {other:?} (expected normal, discrete_per_good, \
                 joint_discrete, or uniform01)"
            )))
        }
    };
    let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
    for key in obj.keys() {
        if !allowed.contains(key.as_str()) {
            return Err(Error::input(format!(
                "unknown key {key:?} in {kind:?} prior"
            )));
        }
    }
    Ok(())
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::input("instance file must be a JSON object"))?;
        for key in obj.keys() {
            if key != "divider_values" && key != "prior" {
                return Err(Error::input(format!("unknown key {key:?} in instance")));
            }
        }
        let prior = obj
            .get("prior")
            .ok_or_else(|| Error::input("instance file is missing \"prior\""))?;
        check_prior_keys(prior)?;
        let file: InstanceFile = serde_json::from_value(value)?;
        file.to_instance()?; // validate eagerly
        Ok(file)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        InstanceFile::parse(&text)
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let prior = match &self.prior {
            PriorFile::Normal { goods } => Prior::normal(goods.clone())?,
            PriorFile::DiscretePerGood { goods } => Prior::discrete_per_good(goods.clone())?,
            PriorFile::JointDiscrete { types } => {
                Prior::joint(JointDiscretePrior::new(types.clone())?)
            }
            PriorFile::Uniform01 { n } => Prior::uniform01(*n),
        };
        Instance::new(self.divider_values.clone(), prior)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        let prior = match instance.prior() {
            Prior::Normal(goods) => PriorFile::Normal {
                goods: goods.clone(),
            },
            Prior::DiscretePerGood(goods) => PriorFile::DiscretePerGood {
                goods: goods.clone(),
            },
            Prior::JointDiscrete(joint) => PriorFile::JointDiscrete {
                types: joint.types().to_vec(),
            },
            Prior::Uniform01 { n } => PriorFile::Uniform01 { n: *n },
        };
        InstanceFile {
            divider_values: instance.divider_values().to_vec(),
            prior,
        }
    }
}

/// A solve report plus the context needed to reproduce it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub tool_version: String,
    /// Echo of the exact configuration the command ran with.
    pub config: Value,
    pub wall_time_s: f64,
    pub report: SolveReport,
}

impl ReportFile {
    pub fn new(config: Value, wall_time_s: f64, report: SolveReport) -> Self {
        ReportFile {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            wall_time_s,
            report,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ReportFile = serde_json::from_str(text)?;
        let p = file.report.pile1_probability;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!(
                "report pile-1 probability {p} outside [0, 1]"
            )));
        }
        Ok(file)
    }
}

fn fmt_row(fields: &[String]) -> String {
    fields.join(",")
}

/// `P,utility` rows in ascending P.
pub fn sweep_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from("P,utility\n");
    for &(p, u) in curve {
        out.push_str(&format!("{p},{u}\n"));
    }
    out
}

pub fn crossover_csv(rows: &[CrossoverRow]) -> String {
    let mut out = String::from(
        "n,trials,divider_per_good,chooser_per_good,divider_se,chooser_se,diff_per_good,diff_se\n",
    );
    for r in rows {
        out.push_str(&fmt_row(&[
            r.n.to_string(),
            r.trials.to_string(),
            r.divider_per_good.to_string(),
            r.chooser_per_good.to_string(),
            r.divider_se.to_string(),
            r.chooser_se.to_string(),
            r.diff_per_good.to_string(),
            r.diff_se.to_string(),
        ]));
        out.push('\n');
    }
    out
}

/// Rows sorted by sample deviation; the value vector rides along in one
/// semicolon-joined field.
pub fn role_csv(rows: &[RoleRow]) -> String {
    let mut out = String::from("sample_deviation,better_role,divider_utility,chooser_utility,values\n");
    for r in rows {
        let values = r
            .values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&fmt_row(&[
            r.deviation.to_string(),
            if r.divider_better() { "divider" } else { "chooser" }.to_string(),
            r.divider_utility.to_string(),
            r.chooser_utility.to_string(),
            values,
        ]));
        out.push('\n');
    }
    out
}

pub fn diversification_csv(rows: &[DiversificationRow]) -> String {
    let mut out =
        String::from("trial,neutral_split,averse_split,neutral_p,averse_p\n");
    for r in rows {
        let join = |p: &[f64]| {
            p.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        out.push_str(&fmt_row(&[
            r.trial.to_string(),
            r.neutral_split.to_string(),
            r.averse_split.to_string(),
            join(&r.neutral_p),
            join(&r.averse_p),
        ]));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Division, SolveMethod};

    const NORMAL_INSTANCE: &str = r#"{
        "divider_values": [1.0, 2.0, 3.0],
        "prior": {"kind": "normal", "goods": [
            {"mean": 100.0, "stdev": 5.0},
            {"mean": 198.0, "stdev": 5.0},
            {"mean": 100.0, "stdev": 5.0}
        ]}
    }"#;

    #[test]
    fn parses_all_prior_kinds() {
        let file = InstanceFile::parse(NORMAL_INSTANCE).unwrap();
        let instance = file.to_instance().unwrap();
        assert_eq!(instance.n(), 3);

        let text = r#"{"divider_values": [1, 1],
            "prior": {"kind": "discrete_per_good", "goods": [
                [{"value": 0.01, "prob": 0.6}, {"value": 1, "prob": 0.4}],
                [{"value": 0.01, "prob": 0.6}, {"value": 1, "prob": 0.4}]
            ]}}"#;
        assert_eq!(InstanceFile::parse(text).unwrap().to_instance().unwrap().n(), 2);

        let text = r#"{"divider_values": [2, 1],
            "prior": {"kind": "joint_discrete", "types": [
                {"values": [1, 1], "prob": 0.5}, {"values": [2, 1], "prob": 0.5}
            ]}}"#;
        assert_eq!(InstanceFile::parse(text).unwrap().to_instance().unwrap().n(), 2);

        let text = r#"{"divider_values": [1, 1], "prior": {"kind": "uniform01", "n": 2}}"#;
        assert_eq!(InstanceFile::parse(text).unwrap().to_instance().unwrap().n(), 2);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        let text = r#"{"divider_values": [1], "prior": {"kind": "uniform01", "n": 1}, "extra": 1}"#;
        assert!(InstanceFile::parse(text).is_err());
        let text = r#"{"divider_values": [1], "prior": {"kind": "uniform01", "n": 1, "m": 2}}"#;
        assert!(InstanceFile::parse(text).is_err());
        let text = r#"{"divider_values": [1], "prior": {"kind": "gamma", "n": 1}}"#;
        assert!(InstanceFile::parse(text).is_err());
        let text = r#"{"divider_values": [0, 0], "prior": {"kind": "uniform01", "n": 2}}"#;
        assert!(InstanceFile::parse(text).is_err());
        let text = r#"{"divider_values": [1],
            "prior": {"kind": "normal", "goods": [{"mean": 1, "stdev": -2}]}}"#;
        assert!(InstanceFile::parse(text).is_err());
    }

    #[test]
    fn instance_roundtrip() {
        let file = InstanceFile::parse(NORMAL_INSTANCE).unwrap();
        let text = serde_json::to_string(&file).unwrap();
        let back = InstanceFile::parse(&text).unwrap();
        assert_eq!(
            back.to_instance().unwrap(),
            file.to_instance().unwrap()
        );
    }

    #[test]
    fn report_roundtrip_field_for_field() {
        let report = SolveReport {
            division: Division::new(vec![1.0, 0.25]).unwrap(),
            pile1_probability: 0.25,
            divider_utility: 1.75,
            chooser_utility: Some(1.75),
            baseline_divider: 1.5,
            method: Some(SolveMethod::DiscreteExact),
            gap_bound: Some(0.0),
        };
        let file = ReportFile::new(serde_json::json!({"method": "discrete"}), 0.125, report);
        let text = file.to_json().unwrap();
        let back = ReportFile::parse(&text).unwrap();
        assert_eq!(back, file);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn csv_shapes() {
        let csv = sweep_csv(&[(0.25, 1.0), (0.5, 1.5)]);
        assert_eq!(csv, "P,utility\n0.25,1\n0.5,1.5\n");
        assert!(crossover_csv(&[]).starts_with("n,trials,"));
    }
}
