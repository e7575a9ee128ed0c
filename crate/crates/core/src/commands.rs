//! Serializable experiment commands, their JSON output and run manifests.
//!
//! A [`Command`] carries every input it needs, so a [`RunManifest`] alone is
//! enough to rerun it. Output bytes do not depend on the thread count.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::combinat::{self, FamilyKind, Omega};
use crate::error::{Error, Result};
use crate::estimates::{
    self, expectation, BoundReport, Calibration, CheckStatus, DeltaKind, JansonStatus, Kind, Lemma, LemmaParams,
};
use crate::lifting::{self, LiftMode};
use crate::parabola::{self, ParabolaCtx};
use crate::polyring::PackedRing;
use crate::randmodel::{Model, ModelParams, OmegaSample};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientKind {
    #[default]
    Product,
    Gn,
}

impl std::str::FromStr for AmbientKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "product" => Ok(AmbientKind::Product),
            "gn" => Ok(AmbientKind::Gn),
            _ => Err(Error::Parse(format!("unknown ambient {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructArgs {
    pub p: u64,
    pub h: u32,
    #[serde(rename = "M0")]
    pub m0: u32,
    #[serde(default)]
    pub ambient: AmbientKind,
    #[serde(default)]
    pub verify_basis3: bool,
    #[serde(default)]
    pub verify_basis4: bool,
    #[serde(default)]
    pub deviation_table: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftArgs {
    pub mode: LiftMode,
    pub sample: OmegaSample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountArgs {
    pub sample: OmegaSample,
    /// Targets to count at; when absent, every target with a nonempty family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsArgs {
    pub lemma: Lemma,
    pub params: LemmaParams,
    pub deg_min: u32,
    pub deg_max: u32,
    /// Compare against the committed constants.
    #[serde(default = "yes")]
    pub pinned: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationsArgs {
    pub model: ModelParams,
    pub kind: Kind,
    pub targets: Vec<u64>,
    #[serde(default)]
    pub delta: bool,
    /// Monte-Carlo trials per target, seeded from `model.seed`.
    #[serde(default)]
    pub mc_trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonArgs {
    pub model: ModelParams,
    pub kind: DeltaKind,
    pub target: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdsvArgs {
    pub model: ModelParams,
    pub family: FamilyKind,
    pub k: usize,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Command {
    Construct(ConstructArgs),
    Sample(ModelParams),
    Lift(LiftArgs),
    Count(CountArgs),
    Sums(SumsArgs),
    Expectations(ExpectationsArgs),
    JansonCheck(JansonArgs),
    Kdsv(KdsvArgs),
    Calibrate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    CheckFailed,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::CheckFailed => 2,
            Outcome::Inconclusive => 3,
        }
    }

    fn worst(self, other: Outcome) -> Outcome {
        match (self, other) {
            (Outcome::CheckFailed, _) | (_, Outcome::CheckFailed) => Outcome::CheckFailed,
            (Outcome::Inconclusive, _) | (_, Outcome::Inconclusive) => Outcome::Inconclusive,
            _ => Outcome::Ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    /// One JSON document, or JSON lines for sweeps; always newline terminated.
    pub text: String,
    pub outcome: Outcome,
}

impl RunOutput {
    pub fn digest(&self) -> String {
        digest(&self.text)
    }
}

pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub command: Command,
    pub seed: Option<u64>,
    pub version: String,
    /// Seconds since the Unix epoch; not part of the digest.
    pub timestamp: u64,
    /// Hex SHA-256 of the output bytes.
    pub digest: String,
}

impl RunManifest {
    pub fn new(command: Command, output: &RunOutput) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            seed: command.seed(),
            command,
            version: VERSION.to_string(),
            timestamp,
            digest: output.digest(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub expected: String,
    pub actual: String,
    pub matches: bool,
    pub version_matches: bool,
}

/// Reruns the manifest's command and compares output digests.
pub fn replay(manifest: &RunManifest) -> Result<(RunOutput, ReplayReport)> {
    manifest.command.validate()?;
    let out = manifest.command.execute()?;
    let actual = out.digest();
    let report = ReplayReport {
        matches: actual == manifest.digest,
        expected: manifest.digest.clone(),
        actual,
        version_matches: manifest.version == VERSION,
    };
    Ok((out, report))
}

fn json_doc<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("serializable");
    s.push('\n');
    s
}

fn json_lines<T: Serialize>(rows: &[T]) -> String {
    rows.iter().map(json_doc).collect()
}

fn check_sample(sample: &OmegaSample) -> Result<Model> {
    let model = Model::new(sample.params.clone())?;
    if let Some(&bad) = sample.members.iter().find(|&&x| !model.is_admissible(x)) {
        return Err(Error::Invalid(format!("member {bad} is not admissible")));
    }
    Ok(model)
}

/// Residue set `S` from text: `parabola` (the Sidon set of `G_N`, needs `4 | N`),
/// `all`, or comma-separated codes.
pub fn residue_set(text: &str, p: u64, h: u32, n: u32) -> Result<Vec<u64>> {
    match text.trim() {
        "parabola" => {
            if n == 0 || !n.is_multiple_of(4) {
                return Err(Error::Invalid(format!("the parabola residue set needs 4 | N, got N={n}")));
            }
            Ok(parabola::build_sidon_in_gn(p, h, n / 4)?.elements)
        }
        "all" => {
            let qn = PackedRing::new(p, h)
                .q_pow(n)
                .filter(|&v| v <= 1 << 24)
                .ok_or_else(|| Error::Invalid(format!("G_{n} is too large to list")))?;
            Ok((0..qn).collect())
        }
        list => list
            .split(',')
            .map(|c| c.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad residue code {c:?}"))))
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructReport {
    pub q_prime: u64,
    pub ambient: parabola::Ambient,
    pub elements: Vec<u64>,
    pub sidon_max_multiplicity: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis3_min_reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis4_min_reps: Option<u64>,
    /// `total - q'` against the number of targets with that deviation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation_table: Option<BTreeMap<i64, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_repeated: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub n: u64,
    #[serde(rename = "Qn")]
    pub qn: u64,
    #[serde(rename = "Tn")]
    pub tn: u64,
    #[serde(rename = "Rn", skip_serializing_if = "Option::is_none")]
    pub rn: Option<u64>,
    #[serde(rename = "Bn", skip_serializing_if = "Option::is_none")]
    pub bn: Option<u64>,
}

pub fn count_rows(sample: &OmegaSample, targets: Option<&[u64]>) -> Result<Vec<CountRow>> {
    let om = Omega::from_sample(sample);
    let eps = sample.params.epsilon;
    let qt = combinat::qt_counts(&om);
    let rb = eps.map(|e| combinat::rb_counts(&om, e));
    let keys: BTreeSet<u64> = match targets {
        Some(t) => t.iter().copied().collect(),
        None => qt.keys().chain(rb.iter().flat_map(|m| m.keys())).copied().collect(),
    };
    Ok(keys
        .into_iter()
        .map(|n| {
            let (qn, tn) = qt.get(&n).copied().unwrap_or_default();
            let r = rb.as_ref().map(|m| m.get(&n).copied().unwrap_or_default());
            CountRow {
                n,
                qn,
                tn,
                rn: r.map(|x| x.0),
                bn: r.map(|x| x.1),
            }
        })
        .collect())
}

fn sums_window_ok(args: &SumsArgs) -> Result<()> {
    let pk = PackedRing::new(args.params.p, args.params.h);
    let top = i64::from(args.deg_max).max(args.params.m).max(0) as u32;
    match pk.q_pow(top + 1) {
        Some(v) if v <= estimates::sigma::MAX_TERMS => Ok(()),
        _ => Err(Error::WindowTooLarge(
            u128::from(pk.q()).saturating_pow(top + 1),
            u128::from(estimates::sigma::MAX_TERMS),
        )),
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Sample(_) => "sample",
            Command::Lift(_) => "lift",
            Command::Count(_) => "count",
            Command::Sums(_) => "sums",
            Command::Expectations(_) => "expectations",
            Command::JansonCheck(_) => "janson-check",
            Command::Kdsv(_) => "kdsv",
            Command::Calibrate => "calibrate",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Sample(m) => Some(m.seed),
            Command::Lift(a) => Some(a.sample.params.seed),
            Command::Count(a) => Some(a.sample.params.seed),
            Command::Expectations(a) if a.mc_trials > 0 => Some(a.model.seed),
            Command::JansonCheck(a) => Some(a.model.seed),
            Command::Kdsv(a) => Some(a.model.seed),
            _ => None,
        }
    }

    /// Cheap checks of every argument; nothing is computed if this fails.
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Construct(a) => ParabolaCtx::new(a.p, a.h, a.m0).map(|_| ()),
            Command::Sample(m) => Model::new(m.clone()).map(|_| ()),
            Command::Lift(a) => a.sample.params.validate(),
            Command::Count(a) => check_sample(&a.sample).map(|_| ()),
            Command::Sums(a) => {
                if a.deg_min == 0 || a.deg_min > a.deg_max {
                    return Err(Error::Invalid(format!(
                        "degree range {}..={} must be nonempty and start at 1 or later",
                        a.deg_min, a.deg_max
                    )));
                }
                sums_window_ok(a)?;
                #[allow(clippy::reversed_empty_ranges)]
                estimates::check_basic_lemma(a.lemma, &a.params, 1..=0, None).map(|_| ())
            }
            Command::Expectations(a) => {
                Model::new(a.model.clone())?;
                expectation::bound_shape(a.kind, a.model.gamma, a.model.epsilon)?;
                if a.targets.is_empty() {
                    return Err(Error::Invalid("at least one target is needed".into()));
                }
                Ok(())
            }
            Command::JansonCheck(a) => {
                Model::new(a.model.clone())?;
                if a.kind == DeltaKind::Rn && a.model.epsilon.is_none() {
                    return Err(Error::EpsilonUnset);
                }
                if a.trials == 0 {
                    return Err(Error::Invalid("at least one trial is needed".into()));
                }
                Ok(())
            }
            Command::Kdsv(a) => {
                Model::new(a.model.clone())?;
                if a.family == FamilyKind::W {
                    return Err(Error::Invalid("the disjoint-vector check does not support W".into()));
                }
                if a.k == 0 || a.trials == 0 {
                    return Err(Error::Invalid("K and the trial count must be positive".into()));
                }
                Ok(())
            }
            Command::Calibrate => Ok(()),
        }
    }

    /// Runs the command. Call [`Command::validate`] first.
    pub fn execute(&self) -> Result<RunOutput> {
        let ok = |text| RunOutput { text, outcome: Outcome::Ok };
        match self {
            Command::Construct(a) => construct(a),
            Command::Sample(m) => Ok(ok(json_doc(&Model::new(m.clone())?.sample()))),
            Command::Lift(a) => {
                let pk = PackedRing::new(a.sample.params.p, a.sample.params.h);
                let rep = lifting::lift_mode(&pk, &a.sample.members, a.mode);
                let good = combinat::verify_b2g(&pk, &rep.survivors, a.mode.g()).holds();
                Ok(RunOutput {
                    text: json_doc(&rep),
                    outcome: if good { Outcome::Ok } else { Outcome::CheckFailed },
                })
            }
            Command::Count(a) => {
                check_sample(&a.sample)?;
                Ok(ok(json_lines(&count_rows(&a.sample, a.targets.as_deref())?)))
            }
            Command::Sums(a) => {
                let cal = Calibration::committed();
                let rows: Vec<BoundReport> = estimates::check_basic_lemma(
                    a.lemma,
                    &a.params,
                    a.deg_min..=a.deg_max,
                    a.pinned.then_some(&cal),
                )?;
                let outcome = rows.iter().fold(Outcome::Ok, |acc, r| {
                    acc.worst(match r.status {
                        CheckStatus::Fail => Outcome::CheckFailed,
                        CheckStatus::Inconclusive => Outcome::Inconclusive,
                        _ => Outcome::Ok,
                    })
                });
                Ok(RunOutput {
                    text: json_lines(&rows),
                    outcome,
                })
            }
            Command::Expectations(a) => {
                let model = Model::new(a.model.clone())?;
                let targets: BTreeSet<u64> = a.targets.iter().copied().collect();
                let rows = targets
                    .into_iter()
                    .map(|t| {
                        let mut r = expectation::expectation_report(&model, a.kind, t, a.delta)?;
                        if a.mc_trials > 0 {
                            let (m, s) = estimates::mc_mean(&model, a.kind, t, a.model.seed, a.mc_trials)?;
                            r.mc_mean = Some(m);
                            r.mc_stderr = Some(s);
                        }
                        Ok(r)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ok(json_lines(&rows)))
            }
            Command::JansonCheck(a) => {
                let model = Model::new(a.model.clone())?;
                let rep = estimates::janson_empirical(&model, a.kind, a.target, a.trials, a.model.seed)?;
                let outcome = match rep.status {
                    JansonStatus::Violated => Outcome::CheckFailed,
                    _ => Outcome::Ok,
                };
                Ok(RunOutput {
                    text: json_doc(&rep),
                    outcome,
                })
            }
            Command::Kdsv(a) => {
                let model = Model::new(a.model.clone())?;
                let rep = estimates::kdsv_probability_empirical(&model, a.family, a.k, a.trials, a.model.seed)?;
                Ok(RunOutput {
                    outcome: if rep.holds { Outcome::Ok } else { Outcome::CheckFailed },
                    text: json_doc(&rep),
                })
            }
            Command::Calibrate => Ok(ok(json_doc(&estimates::calibrate()?))),
        }
    }

    /// Validates, runs and wraps the output in a manifest.
    pub fn run(self) -> Result<(RunOutput, RunManifest)> {
        self.validate()?;
        let out = self.execute()?;
        let manifest = RunManifest::new(self, &out);
        Ok((out, manifest))
    }
}

fn construct(a: &ConstructArgs) -> Result<RunOutput> {
    let ctx = ParabolaCtx::new(a.p, a.h, a.m0)?;
    let set = match a.ambient {
        AmbientKind::Product => parabola::build_parabola(&ctx),
        AmbientKind::Gn => parabola::build_sidon_in_gn(a.p, a.h, a.m0)?,
    };
    let sidon = parabola::verify_sidon(&set);
    let b3 = a.verify_basis3.then(|| parabola::verify_basis3_distinct(&ctx));
    let b4 = a.verify_basis4.then(|| parabola::verify_basis4_distinct(&ctx));
    let (dev, rep) = if a.deviation_table {
        let table = parabola::system_table(&ctx);
        let max_rep = table.iter().map(|c| c.repeated_coords()).max().unwrap_or(0);
        (Some(parabola::deviation_table(&ctx, &table)), Some(max_rep))
    } else {
        (None, None)
    };
    let good = sidon.is_sidon()
        && b3.as_ref().is_none_or(|b| b.holds())
        && b4.as_ref().is_none_or(|b| b.holds())
        && rep.is_none_or(|r| r <= 6);
    let report = ConstructReport {
        q_prime: ctx.q_prime(),
        ambient: set.ambient,
        elements: set.elements,
        sidon_max_multiplicity: sidon.max_multiplicity,
        basis3_min_reps: b3.map(|b| b.min_reps),
        basis4_min_reps: b4.map(|b| b.min_reps),
        deviation_table: dev,
        max_repeated: rep,
    };
    Ok(RunOutput {
        text: json_doc(&report),
        outcome: if good { Outcome::Ok } else { Outcome::CheckFailed },
    })
}
