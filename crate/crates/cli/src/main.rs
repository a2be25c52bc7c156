//! `qmeas` command-line front end.
//!
//! Exit codes: 0 success, 1 invariant or per-record failure, 2 usage or parse
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qmeas::io::{self, FormatError, ObservableFile, PovmFile, Record, ReportFile, SchemeFile, StateFile};
use qmeas::linalg::{self, commutator, op_norm};
use qmeas::metrics::{self, distribution, tv_distance};
use qmeas::observables::{spanning_states, spectral_measure};
use qmeas::schemes::{distorted_observable, induced_observable, invariance_conditions, total_channel};
use qmeas::{gallery, random, DiscretePovm, Error, HermitianObservable, MeasurementScheme, PureState, Tolerance};

#[derive(Debug, Parser)]
#[command(name = "qmeas", version, about = "Noise and disturbance of finite-dimensional quantum measurements")]
struct Cli {
    /// Absolute tolerance for every invariant check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_atol: f64,
    /// Relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_rtol: f64,
    /// Seed for generated random states.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a scheme, POVM, observable or states file against its invariants.
    Validate { path: PathBuf },
    /// Noise of a measurement relative to a target observable.
    Noise {
        #[command(flatten)]
        input: MeasuredInput,
        #[command(flatten)]
        states: StateInput,
        #[arg(long, value_delimiter = ',', default_value = "eps_n,ozawa,tv")]
        measures: Vec<Measure>,
        /// Directory for per-state `outcome,probability` CSV dumps.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disturbance of an observable by a scheme, with the invariance conditions.
    Disturbance {
        #[arg(long)]
        scheme: PathBuf,
        /// Observable file for `B`.
        #[arg(long)]
        observable: PathBuf,
        #[command(flatten)]
        states: StateInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint distribution and covariance decomposition for commuting pairs.
    Joint {
        #[command(flatten)]
        input: MeasuredInput,
        #[command(flatten)]
        states: StateInput,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run worked examples by name, or all of them.
    Gallery {
        #[arg(default_value = "all")]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a report file and print its records.
    Report { path: PathBuf },
}

#[derive(Debug, Args)]
struct MeasuredInput {
    /// Scheme file; the measured POVM is its induced observable.
    #[arg(long, conflicts_with = "povm", required_unless_present = "povm")]
    scheme: Option<PathBuf>,
    /// POVM file.
    #[arg(long)]
    povm: Option<PathBuf>,
    /// Observable file for the target `A`.
    #[arg(long)]
    target: PathBuf,
}

#[derive(Debug, Args)]
struct StateInput {
    /// States file; defaults to the spanning-state protocol.
    #[arg(long)]
    states: Option<PathBuf>,
    /// Additional Haar-random states drawn with `--seed`.
    #[arg(long, default_value_t = 0)]
    random_states: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measure {
    #[value(name = "eps_n")]
    EpsN,
    Ozawa,
    Tv,
}

enum Failure {
    Format(FormatError),
    Usage(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::Format(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Format(FormatError::Invariant(vec![e]))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Format(e)) => {
            match &e {
                FormatError::Invariant(errors) => {
                    for err in errors {
                        eprintln!("invariant violated: {err}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let tol = Tolerance::new(cli.tol_atol, cli.tol_rtol).map_err(|e| Failure::Usage(e.to_string()))?;
    match &cli.command {
        Command::Validate { path } => validate(path, tol),
        Command::Noise {
            input,
            states,
            measures,
            csv_dir,
            out,
        } => noise(cli, tol, input, states, measures, csv_dir.as_deref(), out.as_deref()),
        Command::Disturbance {
            scheme,
            observable,
            states,
            out,
        } => disturbance(cli, tol, scheme, observable, states, out.as_deref()),
        Command::Joint { input, states, out } => joint(cli, tol, input, states, out.as_deref()),
        Command::Gallery { name, out } => run_gallery(name, out.as_deref()),
        Command::Report { path } => report(path),
    }
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn validate(path: &Path, tol: Tolerance) -> Result<u8, Failure> {
    let file = io::load_any(&read_text(path)?)?;
    file.validate(tol)?;
    println!("valid {} file: {}", file.kind(), path.display());
    Ok(0)
}

fn load_measured(input: &MeasuredInput, tol: Tolerance) -> Result<(DiscretePovm, Option<MeasurementScheme>), Failure> {
    if let Some(path) = &input.scheme {
        let scheme = io::read_file::<SchemeFile>(path)?.to_scheme(tol)?;
        Ok((induced_observable(&scheme)?, Some(scheme)))
    } else if let Some(path) = &input.povm {
        Ok((io::read_file::<PovmFile>(path)?.to_povm(tol)?, None))
    } else {
        Err(Failure::Usage("one of --scheme or --povm is required".into()))
    }
}

fn load_observable(path: &Path, dim: usize, tol: Tolerance) -> Result<HermitianObservable, Failure> {
    let a = io::read_file::<ObservableFile>(path)?.to_observable(tol)?;
    linalg::check_dim(a.matrix(), dim)?;
    Ok(a)
}

fn load_states(cli: &Cli, input: &StateInput, dim: usize, tol: Tolerance) -> Result<Vec<PureState>, Failure> {
    let mut states = match &input.states {
        Some(path) => io::read_file::<StateFile>(path)?.to_states(tol)?,
        None => spanning_states(dim),
    };
    let mut rng = random::rng(cli.seed);
    states.extend((0..input.random_states).map(|_| random::random_state(&mut rng, dim)));
    for psi in &states {
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            }
            .into());
        }
    }
    Ok(states)
}

fn record_inputs(report: &mut ReportFile, pairs: &[(&str, Option<&Path>)]) {
    for (role, path) in pairs {
        let value = path.map_or_else(|| "generated".to_string(), |p| p.display().to_string());
        report.inputs.insert((*role).to_string(), value);
    }
}

fn print_records(report: &ReportFile) {
    for r in &report.records {
        match (&r.value, &r.error) {
            (_, Some(err)) => println!("state {:>3}  {:<12} error: {err}", r.state, r.metric),
            (Some(v), None) => println!("state {:>3}  {:<12} {v:.12e}", r.state, r.metric),
            (None, None) => println!("state {:>3}  {:<12} -", r.state, r.metric),
        }
    }
}

fn verdict(report: &ReportFile) -> u8 {
    let bad = report.non_finite_fields();
    for field in &bad {
        eprintln!("non-finite value at {field}");
    }
    u8::from(report.has_failures() || !bad.is_empty())
}

fn emit(report: &ReportFile, out: Option<&Path>) -> Result<u8, Failure> {
    match out {
        Some(path) => {
            io::write_file(path, report)?;
            print_records(report);
        }
        None => print!("{}", io::to_text(report)),
    }
    Ok(verdict(report))
}

fn noise(
    cli: &Cli,
    tol: Tolerance,
    input: &MeasuredInput,
    states: &StateInput,
    measures: &[Measure],
    csv_dir: Option<&Path>,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let (e, scheme) = load_measured(input, tol)?;
    let a = load_observable(&input.target, e.dim(), tol)?;
    let states = load_states(cli, states, e.dim(), tol)?;
    let target = spectral_measure(&a, tol)?;
    let mut report = ReportFile::new("noise", tol);
    record_inputs(
        &mut report,
        &[
            ("measured", input.scheme.as_deref().or(input.povm.as_deref())),
            ("target", Some(&input.target)),
            ("states", states_path(cli)),
        ],
    );
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir).map_err(|source| FormatError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    for (i, psi) in states.iter().enumerate() {
        for m in measures {
            let record = match m {
                Measure::EpsN => match metrics::eps_n(&e, &a, psi, tol) {
                    Ok(v) => Record::value(i, "eps_n", v),
                    Err(err) => Record::failure(i, "eps_n", &err),
                },
                Measure::Ozawa => ozawa_record(i, &e, &a, psi, scheme.as_ref()),
                Measure::Tv => {
                    match distribution(&e, psi, tol).and_then(|p| Ok((p, distribution(target.povm(), psi, tol)?))) {
                        Ok((p, q)) => Record::value(i, "tv", tv_distance(&p, &q, tol.atol)),
                        Err(err) => Record::failure(i, "tv", &err),
                    }
                }
            };
            report.records.push(record);
        }
        if let Some(dir) = csv_dir {
            let d = distribution(&e, psi, tol)?;
            let path = dir.join(format!("state-{i}.csv"));
            std::fs::write(&path, io::distribution_csv(&d)).map_err(|source| FormatError::Io { path, source })?;
        }
    }
    emit(&report, out)
}

fn states_path(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Noise { states, .. } | Command::Disturbance { states, .. } | Command::Joint { states, .. } => {
            states.states.as_deref()
        }
        _ => None,
    }
}

fn ozawa_record(
    i: usize,
    e: &DiscretePovm,
    a: &HermitianObservable,
    psi: &PureState,
    scheme: Option<&MeasurementScheme>,
) -> Record {
    let terms = match metrics::ozawa_noise(e, a, psi) {
        Ok(t) => t,
        Err(err) => return Record::failure(i, "ozawa", &err),
    };
    let mut r = Record::value(i, "ozawa", terms.value());
    r.routes.insert("reduced".into(), terms.value());
    r.routes.insert("spread_term".into(), terms.spread);
    r.routes.insert("bias_term".into(), terms.bias);
    if let Some(s) = scheme {
        match metrics::ozawa_noise_composite_square(s, a, psi) {
            Ok(sq) => {
                r.routes.insert("composite".into(), sq.max(0.0).sqrt());
                r.residuals.insert("composite_vs_reduced_square".into(), (sq - terms.square()).abs());
            }
            Err(err) => r.error = Some(err.to_string()),
        }
    }
    r
}

fn disturbance(
    cli: &Cli,
    tol: Tolerance,
    scheme_path: &Path,
    observable: &Path,
    states: &StateInput,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let scheme = io::read_file::<SchemeFile>(scheme_path)?.to_scheme(tol)?;
    let b = load_observable(observable, scheme.system_dim(), tol)?;
    let states = load_states(cli, states, scheme.system_dim(), tol)?;
    let channel = total_channel(&scheme)?;
    let mut report = ReportFile::new("disturbance", tol);
    record_inputs(
        &mut report,
        &[
            ("scheme", Some(scheme_path)),
            ("observable", Some(observable)),
            ("states", states_path(cli)),
        ],
    );
    for (i, psi) in states.iter().enumerate() {
        let record = match metrics::disturbance(&scheme, &b, psi) {
            Ok(d) => {
                let mut r = Record::value(i, "eta", d.composite);
                r.routes.insert("composite".into(), d.composite);
                r.routes.insert("reduced".into(), d.reduced);
                r.residuals.insert("composite_vs_reduced_square".into(), d.residual);
                r
            }
            Err(err) => Record::failure(i, "eta", &err),
        };
        report.records.push(record);
    }
    report.invariance = Some(invariance_conditions(&channel, &b, tol.atol, tol)?);

    let distorted = distorted_observable(&channel, &spectral_measure(&b, tol)?, tol)?;
    let induced = induced_observable(&scheme)?;
    let mut worst_effects: f64 = 0.0;
    for f in distorted.effects() {
        for g in induced.effects() {
            worst_effects = worst_effects.max(op_norm(&commutator(f, g)));
        }
    }
    let first = induced.moment(1);
    let worst_first = distorted.commutator_residual(first.matrix());
    report.summary.insert("max_commutator_distorted_vs_induced_effects".into(), worst_effects);
    report.summary.insert("max_commutator_distorted_vs_induced_first_moment".into(), worst_first);
    emit(&report, out)
}

fn joint(cli: &Cli, tol: Tolerance, input: &MeasuredInput, states: &StateInput, out: Option<&Path>) -> Result<u8, Failure> {
    let (e, _) = load_measured(input, tol)?;
    let a = load_observable(&input.target, e.dim(), tol)?;
    let states = load_states(cli, states, e.dim(), tol)?;
    let a_spec = spectral_measure(&a, tol)?;
    let mut report = ReportFile::new("joint", tol);
    record_inputs(
        &mut report,
        &[
            ("measured", input.scheme.as_deref().or(input.povm.as_deref())),
            ("target", Some(&input.target)),
            ("states", states_path(cli)),
        ],
    );
    for (i, psi) in states.iter().enumerate() {
        let record = match metrics::verify_cov4(&a_spec, &e, psi, tol) {
            Ok(c) => {
                let mut r = Record::value(i, "eps_square", c.noise_square);
                r.routes.insert("moments".into(), c.noise_square);
                r.routes.insert("covariance_decomposition".into(), c.decomposition);
                r.routes.insert("mean_square_difference".into(), c.mean_square_difference);
                r.routes.insert("product_moment".into(), c.product_moment);
                r.routes.insert("symmetrized_product".into(), c.symmetrized_product);
                r.residuals.insert("max".into(), c.residual);
                r
            }
            Err(err) => Record::failure(i, "eps_square", &err),
        };
        report.records.push(record);
    }
    emit(&report, out)
}

fn run_gallery(name: &str, out: Option<&Path>) -> Result<u8, Failure> {
    let cases = match gallery::run(name) {
        Ok(cases) => cases,
        Err(err @ Error::UnknownCase(_)) => {
            return Err(Failure::Usage(format!(
                "{err}; known cases: all, {}",
                gallery::CASE_NAMES.join(", ")
            )))
        }
        Err(err) => return Err(err.into()),
    };
    let mut all_passed = true;
    for case in &cases {
        println!("{} ({})", case.name, case.summary);
        for c in &case.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            println!("  {verdict:<11} {:<52} {:.6e}", c.label, c.value);
        }
        for c in &case.quarantined {
            let verdict = if c.passed { "holds" } else { "fails" };
            println!("  QUARANTINE  {:<52} {:.6e} (printed claim {verdict})", c.label, c.value);
        }
        for (k, v) in &case.evidence {
            println!("  evidence    {k} = {v:.12e}");
        }
        all_passed &= case.passed();
    }
    if let Some(path) = out {
        io::write_file(path, &cases)?;
    }
    Ok(if all_passed { 0 } else { 1 })
}

fn report(path: &Path) -> Result<u8, Failure> {
    let report: ReportFile = io::read_file(path)?;
    println!(
        "{} report, toolkit {}, atol {:e}, rtol {:e}, {} records",
        report.command,
        report.version,
        report.tolerance.atol,
        report.tolerance.rtol,
        report.records.len()
    );
    print_records(&report);
    Ok(verdict(&report))
}
