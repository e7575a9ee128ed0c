//! `fqsl`: reproducible experiments with JSON output and run manifests.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fqsl::combinat::FamilyKind;
use fqsl::commands::{
    self, AmbientKind, Command, ConstructArgs, CountArgs, ExpectationsArgs, JansonArgs, KdsvArgs, LiftArgs,
    RunManifest, RunOutput, SumsArgs,
};
use fqsl::estimates::{DeltaKind, Kind, Lemma, LemmaParams};
use fqsl::gf::FieldCtx;
use fqsl::lifting::LiftMode;
use fqsl::polyring::PolyRing;
use fqsl::randmodel::{ModelParams, OmegaSample};
use fqsl::ratio::{parse_ratio, Rational};

#[derive(Parser, Debug)]
#[command(name = "fqsl", version, about = "Sidon sets and random B2[g] experiments over F_q[t]")]
struct Cli {
    /// Worker thread cap.
    #[arg(long, global = true, env = "FQSL_THREADS")]
    threads: Option<usize>,
    /// Write the run manifest here instead of to stderr.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Write the output here instead of to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

fn ratio(s: &str) -> Result<Rational, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    h: u32,
    #[arg(long = "N")]
    n: u32,
    /// `parabola`, `all`, or comma-separated residue codes.
    #[arg(long = "S", default_value = "parabola")]
    s: String,
    #[arg(long, value_parser = ratio)]
    gamma: Rational,
    #[arg(long = "M")]
    m: u32,
    #[arg(long = "D")]
    d: u32,
    #[arg(long, value_parser = ratio)]
    epsilon: Option<Rational>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn params(&self) -> fqsl::Result<ModelParams> {
        Ok(ModelParams {
            p: self.p,
            h: self.h,
            n: self.n,
            s: commands::residue_set(&self.s, self.p, self.h, self.n)?,
            gamma: self.gamma,
            m: self.m,
            d: self.d,
            epsilon: self.epsilon,
            seed: self.seed,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the parabola Sidon set and verify it.
    Construct {
        p: u64,
        h: u32,
        #[arg(value_name = "M0")]
        m0: u32,
        #[arg(long)]
        verify_basis3: bool,
        #[arg(long)]
        verify_basis4: bool,
        /// Also tabulate solution counts of the quadratic system.
        #[arg(long)]
        deviation_table: bool,
        #[arg(long, default_value = "product", value_parser = |s: &str| s.parse::<AmbientKind>().map_err(|e| e.to_string()))]
        ambient: AmbientKind,
    },
    /// Draw a seeded sample of the random model.
    Sample(ModelArgs),
    /// Repair a sample into a B2[2] or Sidon set.
    Lift {
        #[arg(long, value_parser = |s: &str| s.parse::<LiftMode>().map_err(|e| e.to_string()))]
        mode: LiftMode,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Count the Q, T, R and B families of a sample.
    Count {
        #[arg(long = "in")]
        input: PathBuf,
        /// Codes or polynomials; default is every target with a nonempty family.
        #[arg(long = "target")]
        targets: Vec<String>,
    },
    /// Sweep a degree-sum lemma and compare against the committed constants.
    Sums {
        #[arg(long, value_parser = |s: &str| s.parse::<Lemma>().map_err(|e| e.to_string()))]
        lemma: Lemma,
        #[arg(long, default_value_t = 5)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value = "7/11", value_parser = ratio)]
        alpha: Rational,
        #[arg(long, default_value = "7/11", value_parser = ratio)]
        beta: Rational,
        #[arg(long, default_value = "7/11", value_parser = ratio)]
        gamma: Rational,
        #[arg(long, default_value = "7/11", value_parser = ratio)]
        phi: Rational,
        #[arg(long, default_value = "7/11", value_parser = ratio)]
        kappa: Rational,
        #[arg(long = "M", default_value_t = -1, allow_negative_numbers = true)]
        m: i64,
        #[arg(long, default_value_t = 1)]
        deg_min: u32,
        #[arg(long, default_value_t = 8)]
        deg_max: u32,
        /// Report ratios without comparing to pinned constants.
        #[arg(long)]
        unpinned: bool,
    },
    /// Exact expectations of family sizes, with optional Monte-Carlo means.
    Expectations {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = |s: &str| s.parse::<Kind>().map_err(|e| e.to_string()))]
        kind: Kind,
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
        #[arg(long)]
        delta: bool,
        #[arg(long, default_value_t = 0)]
        mc_trials: u64,
    },
    /// Empirical lower tail against the Janson bound.
    JansonCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = |s: &str| s.parse::<DeltaKind>().map_err(|e| e.to_string()))]
        kind: DeltaKind,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Frequency of K disjoint vectors in some family against its union bound.
    Kdsv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = |s: &str| s.parse::<FamilyKind>().map_err(|e| e.to_string()))]
        family: FamilyKind,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Recompute the pinned lemma constants.
    Calibrate,
    /// Rerun a manifest and compare output digests.
    Replay { manifest_path: PathBuf },
}

fn read_sample(path: &PathBuf) -> fqsl::Result<OmegaSample> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fqsl::Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| fqsl::Error::Parse(format!("{}: {e}", path.display())))
}

/// A code, or a polynomial such as `t^5+2t^4+3`.
fn target_code(s: &str, p: u64, h: u32) -> fqsl::Result<u64> {
    if let Ok(c) = s.trim().parse::<u64>() {
        return Ok(c);
    }
    let ring = PolyRing::new(FieldCtx::new(p, h)?);
    let f = ring.parse(s)?;
    ring.code(&f)
}

fn targets(ts: &[String], p: u64, h: u32) -> fqsl::Result<Vec<u64>> {
    ts.iter().map(|t| target_code(t, p, h)).collect()
}

fn build(cmd: Cmd) -> fqsl::Result<Command> {
    Ok(match cmd {
        Cmd::Construct {
            p,
            h,
            m0,
            verify_basis3,
            verify_basis4,
            deviation_table,
            ambient,
        } => Command::Construct(ConstructArgs {
            p,
            h,
            m0,
            ambient,
            verify_basis3,
            verify_basis4,
            deviation_table,
        }),
        Cmd::Sample(m) => Command::Sample(m.params()?),
        Cmd::Lift { mode, input } => Command::Lift(LiftArgs {
            mode,
            sample: read_sample(&input)?,
        }),
        Cmd::Count { input, targets: ts } => {
            let sample = read_sample(&input)?;
            let targets = if ts.is_empty() {
                None
            } else {
                Some(targets(&ts, sample.params.p, sample.params.h)?)
            };
            Command::Count(CountArgs { sample, targets })
        }
        Cmd::Sums {
            lemma,
            p,
            h,
            alpha,
            beta,
            gamma,
            phi,
            kappa,
            m,
            deg_min,
            deg_max,
            unpinned,
        } => Command::Sums(SumsArgs {
            lemma,
            params: LemmaParams {
                p,
                h,
                alpha,
                beta,
                gamma,
                phi,
                kappa,
                m,
            },
            deg_min,
            deg_max,
            pinned: !unpinned,
        }),
        Cmd::Expectations {
            model,
            kind,
            targets: ts,
            delta,
            mc_trials,
        } => Command::Expectations(ExpectationsArgs {
            targets: targets(&ts, model.p, model.h)?,
            model: model.params()?,
            kind,
            delta,
            mc_trials,
        }),
        Cmd::JansonCheck {
            model,
            kind,
            target,
            trials,
        } => Command::JansonCheck(JansonArgs {
            target: target_code(&target, model.p, model.h)?,
            model: model.params()?,
            kind,
            trials,
        }),
        Cmd::Kdsv { model, family, k, trials } => Command::Kdsv(KdsvArgs {
            model: model.params()?,
            family,
            k,
            trials,
        }),
        Cmd::Calibrate => Command::Calibrate,
        Cmd::Replay { .. } => unreachable!("handled separately"),
    })
}

fn emit(out: &RunOutput, path: Option<&PathBuf>) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, &out.text),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.text.as_bytes())
        }
    }
}

fn emit_manifest(m: &RunManifest, path: Option<&PathBuf>) -> std::io::Result<()> {
    let text = serde_json::to_string(m).expect("serializable");
    match path {
        Some(p) => std::fs::write(p, text + "\n"),
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(e);
        }
    }
    if let Cmd::Replay { manifest_path } = &cli.cmd {
        let manifest: RunManifest = match std::fs::read_to_string(manifest_path)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
        {
            Ok(m) => m,
            Err(e) => return fail(format!("{}: {e}", manifest_path.display())),
        };
        let (out, report) = match commands::replay(&manifest) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        if let Err(e) = emit(&out, cli.out.as_ref()) {
            return fail(e);
        }
        eprintln!("{}", serde_json::to_string(&report).expect("serializable"));
        return if report.matches { ExitCode::SUCCESS } else { ExitCode::from(2) };
    }
    let command = match build(cli.cmd) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Err(e) = command.validate() {
        return fail(e);
    }
    let out = match command.execute() {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let manifest = RunManifest::new(command, &out);
    if let Err(e) = emit(&out, cli.out.as_ref()).and_then(|_| emit_manifest(&manifest, cli.manifest.as_ref())) {
        return fail(e);
    }
    ExitCode::from(out.outcome.exit_code() as u8)
}
