//! `chora`: validate, evaluate, rewrite and render tangle diagrams, run
//! convergence and identity experiments, and compute with maps between
//! finite metric spaces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use chora::atlas::{self, FiniteMetricSpace, GhMode, MapRelation, ZoomSequence};
use chora::diagram::Diagram;
use chora::evaluate::{self, EvalError, SampleSpec};
use chora::models::{HomeoRegistry, Model, Point};
use chora::rewrite::{self, census, Census, MoveKind, RewriteError};
use chora::scale::ScaleBinding;
use chora::terms::PointBinding;

#[derive(Parser)]
#[command(name = "chora", version, about = "Tangle diagrams for emergent algebras")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a diagram file for structural violations and acceptability.
    Validate { file: PathBuf },
    /// Evaluate a diagram in a model at given scales and inputs.
    Eval {
        file: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: Model,
        /// Scale value, `name=value`; repeatable.
        #[arg(long = "scale", value_name = "K=V", value_parser = parse_scale)]
        scales: Vec<(String, f64)>,
        /// Input point, `name=c1,c2,...`; repeatable.
        #[arg(long = "in", value_name = "NAME=COORDS", value_parser = parse_input)]
        inputs: Vec<(String, Point)>,
    },
    /// Apply one rewrite move at a site.
    Move {
        file: PathBuf,
        /// r1, r2, compose, w1, w2, virtual-insert, virtual-remove,
        /// to-difference, diff-self-similar, elementary-chora,
        /// chora-in-chora, diff-in-chora or approx-r3.
        #[arg(long, value_parser = parse_move)]
        kind: MoveArg,
        /// Node ids, wire ids or indices naming the site.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        site: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rewrite every chora into difference gates and elementary choroi.
    Normalize {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convergence of a diagram's outputs as one scale variable tends to 0.
    Limits {
        file: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[arg(long)]
        var: String,
        #[arg(long, default_value_t = 0.5)]
        from: f64,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 0.5)]
        factor: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Values of the other scale variables, `name=value`; repeatable.
        #[arg(long = "scale", value_name = "K=V", value_parser = parse_scale)]
        scales: Vec<(String, f64)>,
    },
    /// Numerical identity suite of a model.
    Identities {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Defaults to 1e-12 for euclid models and 1e-9 otherwise.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convergence of the approximate R3 residue to the identity.
    Residue {
        #[arg(long, value_parser = parse_model)]
        model: Model,
        #[arg(long)]
        mu: f64,
        #[arg(long = "lambda")]
        lam: f64,
        /// Comma separated scales, or `K0..K1` for 2^-K0 .. 2^-K1.
        #[arg(long, default_value = "1..12", value_parser = parse_schedule)]
        schedule: Schedule,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling radius; defaults to the model's.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Render a diagram as Graphviz DOT.
    Render {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Maps between finite metric spaces and zoom sequences.
    #[command(subcommand)]
    Atlas(AtlasCmd),
}

#[derive(Subcommand)]
enum AtlasCmd {
    /// Accuracy, precision and resolution of a relation.
    Metrics { relation: PathBuf },
    /// Cartographic generalization of a relation.
    Generalize {
        relation: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        mu: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the bounds relating a relation and its generalization.
    Propacc {
        relation: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Gromov-Hausdorff bound between two metric spaces.
    Gh {
        x: PathBuf,
        y: PathBuf,
        /// Random search with this many relations instead of enumeration.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Zoom modulus of a model's rescaling charts, with compositions at `--mu`.
    Zoom {
        #[command(flatten)]
        zoom: ZoomArgs,
        /// Scales `2^-k` for k = 0..=KMAX.
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
    },
    /// Foveal map checks over a grid of scales.
    Foveal {
        #[command(flatten)]
        zoom: ZoomArgs,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25])]
        mu: Vec<f64>,
    },
}

#[derive(Args)]
struct ZoomArgs {
    #[arg(long, default_value = "euclid2", value_parser = parse_model)]
    model: Model,
    /// Center coordinates; defaults to the model origin.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    center: Option<Vec<f64>>,
    /// Pixel size; 0 gives exact charts.
    #[arg(long, default_value_t = 0.0)]
    h: f64,
    #[arg(long, default_value_t = atlas::DEFAULT_GRID_POINTS)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Input(String),
    Verify(String),
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::DivergenceDetected(_) => Failure::Verify(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<RewriteError> for Failure {
    fn from(e: RewriteError) -> Self {
        Failure::Verify(format!("move rejected: {e}"))
    }
}

impl From<atlas::AtlasError> for Failure {
    fn from(e: atlas::AtlasError) -> Self {
        use atlas::AtlasError::*;
        match e {
            DensityViolated { .. } | DivergenceDetected(_) => Failure::Verify(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

/// What a command prints: text for stdout or a file, and whether the
/// verification it ran passed.
struct Report {
    text: Option<String>,
    pass: bool,
}

impl Report {
    fn json(v: Value, pass: bool) -> Self {
        Report {
            text: Some(serde_json::to_string_pretty(&v).expect("json") + "\n"),
            pass,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_diagram(path: &Path) -> Result<Diagram, Failure> {
    Diagram::from_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: chora::models::ModelError| e.to_string())
}

fn parse_kv(s: &str) -> Result<(&str, &str), String> {
    s.split_once('=')
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| format!("expected `name=value`, got `{s}`"))
}

fn parse_coords(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| format!("bad number `{c}`")))
        .collect()
}

fn parse_scale(s: &str) -> Result<(String, f64), String> {
    let (k, v) = parse_kv(s)?;
    Ok((k.to_string(), v.parse().map_err(|_| format!("bad scale value `{v}`"))?))
}

fn parse_input(s: &str) -> Result<(String, Point), String> {
    let (k, v) = parse_kv(s)?;
    Ok((k.to_string(), parse_coords(v)?))
}

#[derive(Clone)]
struct Schedule(Vec<f64>);

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    if let Some((a, b)) = s.split_once("..") {
        let k = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad schedule `{s}`"));
        return Ok(Schedule(evaluate::dyadic_schedule(k(a)?, k(b)?)));
    }
    parse_coords(s).map(Schedule)
}

#[derive(Clone, Copy)]
enum MoveArg {
    Exact(MoveKind),
    ApproxR3,
}

fn parse_move(s: &str) -> Result<MoveArg, String> {
    use MoveKind::*;
    Ok(MoveArg::Exact(match s {
        "r1" => R1RemoveTadpole,
        "r2" => R2CancelPair,
        "compose" => ComposeCrossings,
        "w1" => W1JoinWires,
        "w2" => W2ReverseOverstrand,
        "virtual-insert" => VirtualInsert,
        "virtual-remove" => VirtualRemove,
        "to-difference" => CrossingToDifference,
        "diff-self-similar" => DifferenceSelfSimilar,
        "elementary-chora" => ElementaryChoraDecompose,
        "chora-in-chora" => ChoraInChora,
        "diff-in-chora" => DifferenceInChora,
        "approx-r3" => return Ok(MoveArg::ApproxR3),
        _ => return Err(format!("unknown move kind `{s}`")),
    }))
}

fn write_or_report(text: String, output: &Option<PathBuf>, pass: bool) -> Result<Report, Failure> {
    match output {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            Ok(Report { text: None, pass })
        }
        None => Ok(Report { text: Some(text), pass }),
    }
}

fn census_json(c: &Census) -> Value {
    json!({
        "crossings": c.crossings,
        "gates": c.gates,
        "differenceFamily": c.difference_family,
        "elementaryChoroi": c.elementary_choroi,
        "otherChoroi": c.other_choroi,
        "uncoveredCrossings": c.uncovered_crossings,
        "unverifiedGates": c.unverified_gates,
        "normal": c.is_normal(),
    })
}

fn run(cmd: Cmd) -> Result<Report, Failure> {
    match cmd {
        Cmd::Validate { file } => {
            let d = load_diagram(&file)?;
            let violations: Vec<Value> = d
                .validate()
                .iter()
                .map(|v| json!({"kind": format!("{:?}", v.kind), "ids": v.ids, "message": v.message}))
                .collect();
            let valid = violations.is_empty();
            let acceptable = valid && evaluate::is_acceptable(&d);
            Ok(Report::json(
                json!({
                    "name": d.name,
                    "valid": valid,
                    "acceptable": acceptable,
                    "violations": violations,
                    "census": census_json(&census(&d)),
                }),
                valid,
            ))
        }
        Cmd::Eval { file, model: m, scales, inputs } => {
            let d = load_diagram(&file)?;
                        let pts: PointBinding = inputs.into_iter().collect();
            let f = evaluate::io_function(&d, m, &scales.into_iter().collect::<ScaleBinding>(), &HomeoRegistry::standard())?;
            let out = f.call(&pts)?;
            Ok(Report::json(json!({"model": m.to_string(), "outputs": out}), true))
        }
        Cmd::Move { file, kind, site, output } => {
            let d = load_diagram(&file)?;
            let out = match kind {
                MoveArg::Exact(k) => rewrite::apply_move(&d, k, &site)?,
                MoveArg::ApproxR3 => {
                    let idx = site
                        .first()
                        .map(|s| s.parse::<usize>())
                        .unwrap_or(Ok(0))
                        .map_err(|_| Failure::Input("approx-r3 takes a chora index".into()))?;
                    rewrite::approx_r3(&d, idx)?.0
                }
            };
            write_or_report(out.to_json() + "\n", &output, true)
        }
        Cmd::Normalize { file, output } => {
            let d = load_diagram(&file)?;
            let n = rewrite::normalize_choroi(&d)?;
            let normal = census(&n).is_normal();
            if !normal {
                eprintln!("census after normalization: {}", census(&n));
            }
            write_or_report(n.to_json() + "\n", &output, normal)
        }
        Cmd::Limits {
            file,
            model: m,
            var,
            from,
            steps,
            factor,
            samples,
            seed,
            scales,
        } => {
            let d = load_diagram(&file)?;
                        let schedule = evaluate::geometric_schedule(from, factor, steps);
            let r = evaluate::converge_scan(&d, m, &var, &schedule, &scales.into_iter().collect::<ScaleBinding>(), SampleSpec::new(m, samples, seed))?;
            Ok(Report::json(r.to_json(), r.pass))
        }
        Cmd::Identities { model: m, samples, tol, seed } => {
                        let r = evaluate::check_identities(m, samples, tol.unwrap_or(evaluate::identity_tol(m)), seed)?;
            let symbolic: BTreeMap<&str, bool> = evaluate::symbolic_identities().into_iter().collect();
            let mut v = r.to_json();
            v["symbolic"] = json!(symbolic);
            Ok(Report::json(v, r.pass))
        }
        Cmd::Residue {
            model: m,
            mu,
            lam,
            schedule,
            samples,
            seed,
            radius,
        } => {
                                    let triples = evaluate::residue_samples(m, samples, seed, radius.unwrap_or(m.default_radius()));
            let r = evaluate::residue_convergence(m, &m.origin(), &triples, mu, lam, &schedule.0)?;
            let mut v = r.to_json();
            v["monotone"] = json!(r.is_monotone());
            Ok(Report::json(v, r.pass))
        }
        Cmd::Render { file, output } => write_or_report(load_diagram(&file)?.to_dot(), &output, true),
        Cmd::Atlas(a) => run_atlas(a),
    }
}

/// A space given inline or as a path relative to `dir`.
fn space_ref(v: &Value, dir: &Path) -> Result<Arc<FiniteMetricSpace>, Failure> {
    let v = match v {
        Value::String(p) => load_json(&dir.join(p))?,
        Value::Object(_) => v.clone(),
        _ => return Err(Failure::Input("`source` and `target` must be paths or spaces".into())),
    };
    Ok(Arc::new(FiniteMetricSpace::from_json(&v)?))
}

fn load_relation(path: &Path) -> Result<(Value, MapRelation), Failure> {
    let v = load_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let missing = |k: &str| Failure::Input(format!("{}: missing `{k}`", path.display()));
    let x = space_ref(v.get("source").ok_or_else(|| missing("source"))?, dir)?;
    let y = space_ref(v.get("target").ok_or_else(|| missing("target"))?, dir)?;
    let rel = MapRelation::from_json(&v, x, y)?;
    Ok((v, rel))
}

fn load_space(path: &Path) -> Result<Arc<FiniteMetricSpace>, Failure> {
    Ok(Arc::new(FiniteMetricSpace::from_json(&load_json(path)?)?))
}

fn zoom_sequence(z: &ZoomArgs) -> Result<ZoomSequence, Failure> {
    let m = z.model;
    let center = z.center.clone().unwrap_or_else(|| m.origin());
    Ok(ZoomSequence::with_grid(m, &center, z.h, z.points, atlas::DEFAULT_LEVELS, z.seed)?)
}

fn run_atlas(cmd: AtlasCmd) -> Result<Report, Failure> {
    match cmd {
        AtlasCmd::Metrics { relation } => {
            let (_, rel) = load_relation(&relation)?;
            Ok(Report::json(atlas::metrics(&rel).to_json(), true))
        }
        AtlasCmd::Generalize { relation, eps, mu, output } => {
            let (v, rel) = load_relation(&relation)?;
            let bar = atlas::generalize(&rel, eps, mu)?;
            let mut out = bar.to_json("", "");
            let same_dir = output.as_ref().is_none_or(|o| o.parent() == relation.parent());
            for (key, space) in [("source", &bar.source), ("target", &bar.target)] {
                out[key] = if same_dir { v[key].clone() } else { space.to_json() };
            }
            write_or_report(serde_json::to_string_pretty(&out).expect("json") + "\n", &output, true)
        }
        AtlasCmd::Propacc { relation, eps, mu } => {
            let (_, rel) = load_relation(&relation)?;
            let r = atlas::check_propacc1(&rel, eps, mu)?;
            Ok(Report::json(r.to_json(), r.pass))
        }
        AtlasCmd::Gh { x, y, budget, seed } => {
            let (x, y) = (load_space(&x)?, load_space(&y)?);
            let mode = match budget {
                Some(budget) => GhMode::Stochastic { budget, seed },
                None => GhMode::ExactSmall,
            };
            let b = atlas::gh_bound(&x, &y, mode)?;
            let name = if budget.is_some() { "stochastic" } else { "exact" };
            Ok(Report::json(json!({"mode": name, "bound": b}), true))
        }
        AtlasCmd::Zoom { zoom, kmax, mu } => {
            let zs = zoom_sequence(&zoom)?;
            let scales: Vec<f64> = (0..=kmax).map(|k| 0.5f64.powi(k as i32)).collect();
            let modulus = scales.iter().map(|t| zs.modulus(*t)).collect::<Result<Vec<_>, _>>()?;
            let mut compositions = Vec::new();
            let mut stability = Vec::new();
            let mut pass = true;
            for &m in &mu {
                for &t in &scales {
                    let c = zs.scale_composition(t, m)?;
                    pass &= c.holds;
                    compositions.push(c.to_json());
                }
                if scales.len() >= 2 {
                    stability.push(zs.scale_stability_check(m, &scales)?.to_json());
                }
            }
            Ok(Report::json(
                json!({
                    "model": zs.model.to_string(),
                    "center": zs.center,
                    "h": zs.h,
                    "scales": scales,
                    "modulus": modulus,
                    "compositions": compositions,
                    "stability": stability,
                    "pass": pass,
                }),
                pass,
            ))
        }
        AtlasCmd::Foveal { zoom, kmax, mu } => {
            let zs = zoom_sequence(&zoom)?;
            let ks: Vec<u32> = (0..=kmax).collect();
            let r = zs.foveal_properties_check(&mu, &ks)?;
            Ok(Report::json(r.to_json(), r.pass()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(r) => {
            if let Some(t) = r.text {
                print!("{t}");
            }
            if r.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Verify(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
