use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use super::{run_experiment, run_scaling_sweep, run_verify_suite, ExperimentConfig, InstanceSpec, ReportRow, SweepConfig};
use crate::lra::{run_algorithm, Algorithm, BudgetRule, LraConfig, Reference};
use crate::metricspace::{gen_clustered, gen_uniform, gen_zero, HardInstanceSpec};
use crate::metricspace::io::{save_matrix, save_points};
use crate::metricspace::{check_approx_triangle, TriangleCheck};
use crate::{Error, Metric, Result};

#[derive(Parser, Debug)]
#[command(name = "subdist", version, about = "Sublinear low-rank approximation of distance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an instance to disk.
    Gen(GenArgs),
    /// Run one algorithm and print report rows.
    Approx(ApproxArgs),
    /// Sweep n and fit the entry-read exponent.
    BenchScaling(ScalingArgs),
    /// Run the property-check suite on small instances.
    Verify(VerifyArgs),
    /// Emit the l-infinity lower-bound instance and compare entry counts on it.
    HardInstance(HardArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Generator {
    Clustered,
    Uniform,
    Zero,
    Hard,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Profile {
    Paper,
    Desk,
}

fn parse_algo(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sign(s: &str) -> std::result::Result<i8, String> {
    match s {
        "+" | "+1" | "plus" => Ok(1),
        "-" | "-1" | "minus" => Ok(-1),
        other => Err(format!("sign must be + or -, got `{other}`")),
    }
}

/// Instance selection shared by `gen` and `approx`.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct InstanceArgs {
    /// Generator for a synthetic instance.
    #[arg(long, value_enum)]
    gen: Option<Generator>,
    /// Point file; the matrix is the point set against itself.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Explicit matrix file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_metric)]
    metric: Option<Metric>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    spread: Option<f64>,
    /// Seed of the instance generator (defaults to --seed).
    #[arg(long)]
    instance_seed: Option<u64>,
    /// Special row of the hard instance, 1-based.
    #[arg(long)]
    row: Option<usize>,
    #[arg(long, value_parser = parse_sign, allow_hyphen_values = true)]
    sign: Option<i8>,
}

impl InstanceArgs {
    fn merge(self, o: Self) -> Self {
        Self {
            gen: self.gen.or(o.gen),
            points: self.points.or(o.points),
            matrix: self.matrix.or(o.matrix),
            m: self.m.or(o.m),
            n: self.n.or(o.n),
            metric: self.metric.or(o.metric),
            clusters: self.clusters.or(o.clusters),
            dim: self.dim.or(o.dim),
            spread: self.spread.or(o.spread),
            instance_seed: self.instance_seed.or(o.instance_seed),
            row: self.row.or(o.row),
            sign: self.sign.or(o.sign),
        }
    }

    fn spec(&self, seed: u64) -> Result<InstanceSpec> {
        let seed = self.instance_seed.unwrap_or(seed);
        let metric = self.metric.unwrap_or(Metric::Euclidean);
        if let Some(path) = &self.points {
            return Ok(InstanceSpec::Points { path: path.clone(), metric });
        }
        if let Some(path) = &self.matrix {
            return Ok(InstanceSpec::Matrix { path: path.clone() });
        }
        let n = self.n.unwrap_or(256);
        let m = self.m.unwrap_or(n);
        Ok(match self.gen.unwrap_or(Generator::Clustered) {
            Generator::Clustered => InstanceSpec::Clustered {
                m,
                n,
                clusters: self.clusters.unwrap_or(10).min(m.min(n)),
                dim: self.dim.unwrap_or(3),
                spread: self.spread.unwrap_or(0.05),
                metric,
                seed,
            },
            Generator::Uniform => InstanceSpec::Uniform { m, n, dim: self.dim.unwrap_or(3), metric, seed },
            Generator::Zero => InstanceSpec::Zero { m, n },
            Generator::Hard => InstanceSpec::Hard(self.hard(n, seed)?),
        })
    }

    fn hard(&self, n: usize, seed: u64) -> Result<HardInstanceSpec> {
        let row = self.row.unwrap_or(1);
        if row == 0 {
            return Err(Error::param("--row is 1-based"));
        }
        let spec = HardInstanceSpec {
            n,
            special_row: row - 1,
            sign: self.sign.unwrap_or(1),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Shorthand for `--gen hard`.
    #[arg(long)]
    hard_instance: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (matrix), or prefix for `<prefix>.p` / `<prefix>.q` point files.
    #[arg(long, short)]
    out: PathBuf,
    /// Write the distance matrix instead of point sets.
    #[arg(long)]
    as_matrix: bool,
}

/// Flags of `approx`; a `--config` JSON file uses the same names.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct ApproxArgs {
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_parser = parse_algo)]
    algo: Option<Algorithm>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Constant profile: `paper` (default) or `desk`.
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    #[arg(long)]
    b1: Option<usize>,
    #[arg(long)]
    b2: Option<usize>,
    #[arg(long)]
    budget_coef: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    c_pcp: Option<f64>,
    #[arg(long)]
    c_cw: Option<f64>,
    #[arg(long)]
    c_psd: Option<f64>,
    #[arg(long)]
    s_reg: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    floor_mix: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    dense_cap: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    repeat: Option<usize>,
    /// Evaluate the residual against the dense SVD.
    #[arg(long)]
    #[serde(skip)]
    verify: bool,
    /// Print JSON instead of CSV.
    #[arg(long)]
    #[serde(skip)]
    json: bool,
    /// Check the approximate triangle inequality at this slack first (warning only).
    #[arg(long)]
    check_triangle: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Flat JSON object with flag names as keys; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl ApproxArgs {
    fn merge(self, o: Self) -> Self {
        Self {
            instance: self.instance.merge(o.instance),
            algo: self.algo.or(o.algo),
            k: self.k.or(o.k),
            eps: self.eps.or(o.eps),
            seed: self.seed.or(o.seed),
            profile: self.profile.or(o.profile),
            b1: self.b1.or(o.b1),
            b2: self.b2.or(o.b2),
            budget_coef: self.budget_coef.or(o.budget_coef),
            gamma: self.gamma.or(o.gamma),
            depth: self.depth.or(o.depth),
            c_pcp: self.c_pcp.or(o.c_pcp),
            c_cw: self.c_cw.or(o.c_cw),
            c_psd: self.c_psd.or(o.c_psd),
            s_reg: self.s_reg.or(o.s_reg),
            reps: self.reps.or(o.reps),
            floor_mix: self.floor_mix.or(o.floor_mix),
            delta: self.delta.or(o.delta),
            dense_cap: self.dense_cap.or(o.dense_cap),
            trials: self.trials.or(o.trials),
            repeat: self.repeat.or(o.repeat),
            verify: self.verify,
            json: self.json,
            check_triangle: self.check_triangle.or(o.check_triangle),
            out: self.out.or(o.out),
            config: self.config,
        }
    }

    fn lra_config(&self, profile: Profile) -> LraConfig {
        let k = self.k.unwrap_or(10);
        let eps = self.eps.unwrap_or(0.5);
        let mut cfg = match profile {
            Profile::Paper => LraConfig::new(k, eps),
            Profile::Desk => LraConfig::desk(k, eps),
        };
        cfg.seed = self.seed.unwrap_or(0);
        cfg.b1 = self.b1.or(cfg.b1);
        cfg.b2 = self.b2.or(cfg.b2);
        if let Some(coef) = self.budget_coef {
            cfg.budget = BudgetRule::Power { coef };
        }
        cfg.gamma = self.gamma.unwrap_or(cfg.gamma);
        cfg.depth_2r = self.depth.unwrap_or(cfg.depth_2r);
        cfg.c_pcp = self.c_pcp.unwrap_or(cfg.c_pcp);
        cfg.c_cw = self.c_cw.unwrap_or(cfg.c_cw);
        cfg.c_psd = self.c_psd.unwrap_or(cfg.c_psd);
        cfg.s_reg = self.s_reg.or(cfg.s_reg);
        cfg.repetitions = self.reps.or(cfg.repetitions);
        cfg.floor_mix = self.floor_mix.unwrap_or(cfg.floor_mix);
        cfg.delta = self.delta.or(cfg.delta);
        cfg.dense_cap = self.dense_cap.unwrap_or_else(crate::dense_cap_from_env);
        cfg
    }
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, value_parser = parse_algo, default_value = "two_level")]
    algo: Algorithm,
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 512, 1024, 2048])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "desk")]
    profile: Profile,
    #[arg(long, value_parser = parse_metric, default_value = "euclidean")]
    metric: Metric,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 0.05)]
    spread: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct HardArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Special row, 1-based.
    #[arg(long, default_value_t = 1)]
    row: usize,
    #[arg(long, value_parser = parse_sign, allow_hyphen_values = true, default_value = "+")]
    sign: i8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Also write the matrix here.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let mut inst = args.instance;
    if args.hard_instance {
        inst.gen = Some(Generator::Hard);
    }
    let spec = inst.spec(args.seed)?;
    let as_matrix = args.as_matrix || matches!(spec, InstanceSpec::Hard(_) | InstanceSpec::Zero { .. });
    if as_matrix {
        let oracle = spec.build()?;
        save_matrix(&args.out, &oracle.dense_uncounted())?;
        return Ok(());
    }
    let (p, q) = match &spec {
        InstanceSpec::Clustered { m, n, clusters, dim, spread, seed, .. } => {
            gen_clustered(*m, *n, *clusters, *dim, *spread, *seed)?
        }
        InstanceSpec::Uniform { m, n, dim, seed, .. } => gen_uniform(*m, *n, *dim, *seed)?,
        InstanceSpec::Zero { m, n } => gen_zero(*m, *n, 1)?,
        _ => return Err(Error::param("gen needs a generator (--gen or --hard-instance)")),
    };
    let with_ext = |ext: &str| {
        let mut s = args.out.clone().into_os_string();
        s.push(ext);
        PathBuf::from(s)
    };
    save_points(with_ext(".p"), &p)?;
    save_points(with_ext(".q"), &q)?;
    Ok(())
}

fn cmd_approx(args: ApproxArgs) -> Result<()> {
    let args = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let file: ApproxArgs = serde_json::from_str(&text)?;
            args.merge(file)
        }
        None => args,
    };
    let profile = args.profile.unwrap_or(Profile::Paper);
    let lra = args.lra_config(profile);
    let exp = ExperimentConfig {
        instance: args.instance.spec(lra.seed)?,
        algorithm: args.algo.unwrap_or(Algorithm::TwoLevel),
        lra,
        trials: args.trials.unwrap_or(1),
        repeat: args.repeat.unwrap_or(1),
        output: args.out.clone(),
        verify: args.verify,
    };
    if let Some(tri_eps) = args.check_triangle {
        let oracle = exp.instance.build()?;
        let rep = check_approx_triangle(&oracle, &TriangleCheck::sampled(tri_eps, 2000, exp.lra.seed))?;
        if !rep.pass {
            log::warn!(
                "approximate triangle inequality fails at eps={tri_eps} (worst ratio {}); the guarantee is void",
                rep.worst_ratio
            );
        }
    }
    let rows = run_experiment(&exp)?;
    let mut w = output(&exp.output)?;
    if args.json {
        if rows.len() == 1 {
            serde_json::to_writer_pretty(&mut w, &rows[0])?;
        } else {
            serde_json::to_writer_pretty(&mut w, &rows)?;
        }
        writeln!(w)?;
    } else {
        ReportRow::write_csv(&mut w, &rows)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_scaling(args: ScalingArgs) -> Result<()> {
    let lra = match args.profile {
        Profile::Paper => LraConfig::new(args.k, args.eps),
        Profile::Desk => LraConfig::desk(args.k, args.eps),
    }
    .with_seed(args.seed);
    let cfg = SweepConfig {
        algorithm: args.algo,
        lra: LraConfig { dense_cap: crate::dense_cap_from_env(), ..lra },
        clusters: args.clusters,
        dim: args.dim,
        spread: args.spread,
        metric: args.metric,
    };
    let table = run_scaling_sweep(&args.sizes, &cfg)?;
    let mut w = output(&args.out)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let outcomes = run_verify_suite(args.seed);
    let mut failed = 0;
    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        return Err(Error::contract(format!("{failed} of {} checks failed", outcomes.len())));
    }
    Ok(())
}

fn cmd_hard(args: HardArgs) -> Result<()> {
    if args.row == 0 {
        return Err(Error::param("--row is 1-based"));
    }
    let spec = HardInstanceSpec {
        n: args.n,
        special_row: args.row - 1,
        sign: args.sign,
        seed: args.seed,
    };
    let dense = spec.matrix()?;
    if let Some(path) = &args.out {
        save_matrix(path, &dense)?;
    }
    let s = crate::sketchlin::singular_values(&dense);
    println!("# n={} special=({}, {}) value={}", spec.n, args.row, spec.distinguished_column() + 1, spec.special_value());
    println!("# sigma3/sigma1={}", super::format_float(s.get(2).copied().unwrap_or(0.0) / s[0]));
    let base = crate::metricspace::gen_linf_hard(spec)?;
    let reference = Reference::compute(&dense, args.k);
    let id = InstanceSpec::Hard(spec).id();
    let mut rows = Vec::new();
    for algo in [Algorithm::TwoLevel, Algorithm::Recursive, Algorithm::SvdOracle] {
        let cfg = LraConfig::desk(args.k, args.eps).with_seed(args.seed);
        let oracle = Arc::new(base.fresh());
        let rep = run_algorithm(algo, &oracle, &cfg)?;
        let res = reference.residual(&dense, &rep.factors)?;
        rows.push(ReportRow::from_report(&id, &oracle, &rep, Some(&res)));
    }
    ReportRow::write_csv(std::io::stdout().lock(), &rows)?;
    Ok(())
}

/// Entry point of the `subdist` binary. Returns the process exit code:
/// 0 on success, 2 for usage errors, 1 for contract violations and other failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Approx(a) => cmd_approx(a),
        Command::BenchScaling(a) => cmd_scaling(a),
        Command::Verify(a) => cmd_verify(a),
        Command::HardInstance(a) => cmd_hard(a),
    };
    match result {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::Parse { .. } | Error::Json(_) => 2,
                _ => 1,
            }
        }
    }
}
