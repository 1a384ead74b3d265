use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use quasifin_core::linear::fmt_q;
use quasifin_core::modcat::{round_trip_check, synthetic_algebras, FinModule, GradedAlgebra};
use quasifin_core::pca::{
    dim_bound, psi_surjection_check, replay_certificate, straighten_certified, LoopSymbol, Monomial, Rule,
    StraightPoly, Verdict,
};
use quasifin_core::quotient::{compute_family, extract_finite_algebra, spectrum, TruncationWindow};
use quasifin_core::report::{fmt_set, spectrum_row, Report, Status, SPECTRUM_COLUMNS};
use quasifin_core::voa::{check_borcherds, load_voa, VoaData};
use quasifin_core::zhu::{c2_quotient, load_poisson, poisson_check, PoissonAlgebraData};
use quasifin_core::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    CheckAxioms,
    Borcherds,
    QuotientDims,
    Spectrum,
    FiniteAlgebra,
    ZhuPoisson,
    PcaBounds,
    Straighten,
    SurjectionCheck,
    FunctorCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

/// Exact truncated computations on vertex algebra and Poisson algebra inputs.
#[derive(Parser, Debug)]
#[command(name = "quasifin", version)]
struct Args {
    #[arg(long, value_enum)]
    command: Command,
    /// Input JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    n_max: i64,
    #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
    d_min: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    d_max: i64,
    /// Defaults to the weight window of the input.
    #[arg(long)]
    max_weight: Option<i64>,
    #[arg(long, default_value_t = 2)]
    depth: i64,
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// Level cap for functor checks; defaults to the largest available.
    #[arg(long)]
    cap: Option<i64>,
    /// Mode bound for `borcherds`: all `|k|, |m|, |n|` up to this value.
    #[arg(long, default_value_t = 3)]
    bound: i64,
    /// Monomial for `straighten`, e.g. `P_-2(e)*P_-2(e)`.
    #[arg(long, allow_hyphen_values = true)]
    monomial: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Input problems exit with 3; everything else lands in the report.
struct InputError(String);

type Run<T> = std::result::Result<T, InputError>;

fn read(path: &Path) -> Run<String> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn input_path(args: &Args) -> Run<&Path> {
    args.input.as_deref().ok_or_else(|| InputError("--input is required for this command".into()))
}

fn load_voa_input(args: &Args) -> Run<VoaData> {
    let path = input_path(args)?;
    load_voa(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_poisson_input(args: &Args) -> Run<PoissonAlgebraData> {
    let path = input_path(args)?;
    load_poisson(&read(path)?).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn window(args: &Args, voa: &VoaData) -> Run<TruncationWindow> {
    let w = args.max_weight.unwrap_or_else(|| voa.max_weight());
    if w > voa.max_weight() {
        return Err(InputError(format!("--max-weight {w} exceeds the input window {}", voa.max_weight())));
    }
    TruncationWindow::new(w, args.depth, args.rounds).map_err(|e| InputError(e.to_string()))
}

fn check_ranges(args: &Args) -> Run<()> {
    if args.n_max < 0 {
        return Err(InputError(format!("--n-max {} < 0", args.n_max)));
    }
    if args.d_min > args.d_max {
        return Err(InputError(format!("empty degree range {}..={}", args.d_min, args.d_max)));
    }
    if args.bound < 0 {
        return Err(InputError(format!("--bound {} < 0", args.bound)));
    }
    Ok(())
}

/// Computation errors become report notes with an outcome.
fn absorb(report: &mut Report, context: &str, e: Error) {
    let status = match e {
        Error::OutOfWindow(_) | Error::NotConverged(_) => Status::Inconclusive,
        _ => Status::Fail,
    };
    report.note(format!("{context}: {e}"));
    report.degrade(status);
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "no" }.into()
}

fn check_axioms(args: &Args) -> Run<Report> {
    let voa = load_voa_input(args)?;
    let rep = voa.check_axioms();
    let mut r = Report::new("check-axioms", &["failure"]);
    for f in &rep.failures {
        r.push_row(vec![f.clone()]);
    }
    r.note(format!("checked {}, skipped {}", rep.checked, rep.skipped));
    if !rep.failures.is_empty() {
        r.degrade(Status::Fail);
    }
    Ok(r)
}

fn borcherds(args: &Args) -> Run<Report> {
    let voa = load_voa_input(args)?;
    let out = check_borcherds(&voa, args.bound);
    let mut r = Report::new("borcherds", &["k", "m", "n", "u", "v", "w", "residual"]);
    for res in &out.residuals {
        r.push_row(vec![
            res.k.to_string(),
            res.m.to_string(),
            res.n.to_string(),
            voa.symbol(res.u).into(),
            voa.symbol(res.v).into(),
            voa.symbol(res.w).into(),
            voa.render(&res.residual),
        ]);
    }
    r.note(format!("bound {}, checked {}, skipped {}", args.bound, out.checked, out.skipped));
    if !out.residuals.is_empty() {
        r.degrade(Status::Fail);
    }
    Ok(r)
}

fn quotient_dims(args: &Args) -> Run<Report> {
    let voa = load_voa_input(args)?;
    let w = window(args, &voa)?;
    let mut r = Report::new("quotient-dims", &["n", "d", "dim_upper", "converged", "dropped"]);
    for n in 0..=args.n_max {
        let hi = args.d_max.max(0) + w.depth;
        let fam = match compute_family(&voa, n, -n, hi, &w) {
            Ok(f) => f,
            Err(e) => {
                absorb(&mut r, &format!("n={n}"), e);
                continue;
            }
        };
        for d in args.d_min..=args.d_max {
            let row = match fam.get(&d) {
                Some(s) => {
                    if !s.converged {
                        r.degrade(Status::Inconclusive);
                    }
                    vec![n.to_string(), d.to_string(), s.dim_upper.to_string(), yes_no(s.converged), s.dropped.to_string()]
                }
                // below degree -n every slice vanishes
                None => vec![n.to_string(), d.to_string(), "0".into(), "yes".into(), "0".into()],
            };
            r.push_row(row);
        }
    }
    Ok(r)
}

fn spectrum_cmd(args: &Args) -> Run<Report> {
    let voa = load_voa_input(args)?;
    let w = window(args, &voa)?;
    let mut r = Report::new("spectrum", &SPECTRUM_COLUMNS);
    for n in 0..=args.n_max {
        match spectrum(&voa, n, &w) {
            Ok(s) => {
                if !s.omega_in_gamma {
                    r.note(format!("n={n}: Omega_n is not inside Gamma_(n+g)"));
                    r.degrade(Status::Fail);
                }
                if !s.multiplicities_bounded {
                    r.note(format!("n={n}: root multiplicity exceeds ell"));
                    r.degrade(Status::Fail);
                }
                if s.provisional {
                    r.note(format!("n={n}: provisional, a slice did not stabilize"));
                    r.degrade(Status::Inconclusive);
                }
                r.push_row(spectrum_row(&s));
            }
            Err(e) => absorb(&mut r, &format!("n={n}"), e),
        }
    }
    Ok(r)
}

fn finite_algebra(args: &Args) -> Run<Report> {
    let voa = load_voa_input(args)?;
    let w = window(args, &voa)?;
    let mut r = Report::new("finite-algebra", &["n", "basis", "lambda", "mu", "degree"]);
    for n in 0..=args.n_max {
        match extract_finite_algebra(&voa, n, n, &w) {
            Ok(a) => {
                for (i, (l, m)) in a.labels.iter().enumerate() {
                    r.push_row(vec![n.to_string(), i.to_string(), fmt_q(l), fmt_q(m), fmt_q(&a.degree(i))]);
                }
                let bad = a.check();
                for b in &bad {
                    r.note(format!("n={n}: {b}"));
                }
                if !bad.is_empty() {
                    r.degrade(Status::Fail);
                }
                r.note(format!("n={n}: dim {}, Gamma_n {}", a.dim(), fmt_set(&a.gamma)));
            }
            Err(e) => absorb(&mut r, &format!("n={n}"), e),
        }
    }
    Ok(r)
}

fn zhu_poisson(args: &Args) -> Run<Report> {
    let path = input_path(args)?;
    let text = read(path)?;
    let mut r = Report::new("zhu-poisson", &["item", "value"]);
    let p = match load_voa(&text) {
        Ok(voa) => {
            let w = window(args, &voa)?;
            match c2_quotient(&voa, &w) {
                Ok(p) => {
                    for (wt, dim) in p.profile.iter().enumerate() {
                        r.push_row(vec![format!("dim p[{wt}]"), dim.to_string()]);
                    }
                    r.push_row(vec!["c2-finite within window".into(), yes_no(p.c2_finite_within_window)]);
                    p
                }
                Err(e) => {
                    absorb(&mut r, "c2 quotient", e);
                    return Ok(r);
                }
            }
        }
        Err(_) => load_poisson(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?,
    };
    for (i, b) in p.basis.iter().enumerate() {
        r.push_row(vec![format!("basis {i}"), format!("{} (weight {})", b.symbol, b.weight)]);
    }
    let rep = poisson_check(&p, None);
    for f in &rep.failures {
        r.push_row(vec![format!("failure {}", f.law), f.witness.join(", ")]);
    }
    r.note(format!("checked {}, skipped {}, exhaustive {}", rep.checked, rep.skipped_unknown, yes_no(rep.exhaustive)));
    if !rep.passed() {
        r.degrade(Status::Fail);
    }
    Ok(r)
}

fn pca_bounds(args: &Args) -> Run<Report> {
    let p = load_poisson_input(args)?;
    let mut r = Report::new("pca-bounds", &["n", "d", "bound", "saturated"]);
    let saturate = p.complete.then_some(args.rounds);
    for n in 0..=args.n_max {
        for d in args.d_min..=args.d_max {
            match dim_bound(&p, n, d, saturate) {
                Ok(b) => r.push_row(vec![
                    n.to_string(),
                    d.to_string(),
                    b.bound.to_string(),
                    b.saturated_upper.map_or("-".into(), |s| s.to_string()),
                ]),
                Err(e) => absorb(&mut r, &format!("n={n} d={d}"), e),
            }
        }
    }
    if saturate.is_none() {
        r.note("multiplication table incomplete: saturation skipped");
    }
    Ok(r)
}

fn parse_monomial(p: &PoissonAlgebraData, text: &str) -> Run<Vec<LoopSymbol>> {
    let bad = || InputError(format!("monomial `{text}` is not of the form P_i(x)*P_j(y)*..."));
    let mut out = Vec::new();
    for part in text.split(['*', ' ']).filter(|s| !s.is_empty()) {
        let rest = part.strip_prefix("P_").ok_or_else(bad)?;
        let (idx, sym) = rest.split_once('(').ok_or_else(bad)?;
        let sym = sym.strip_suffix(')').ok_or_else(bad)?;
        let index: i64 = idx.parse().map_err(|_| bad())?;
        let elem = p
            .basis
            .iter()
            .position(|b| b.symbol == sym)
            .ok_or_else(|| InputError(format!("unknown basis symbol `{sym}`")))?;
        out.push(LoopSymbol::new(index, elem));
    }
    Ok(out)
}

fn straighten_cmd(args: &Args) -> Run<Report> {
    let p = load_poisson_input(args)?;
    let text = args.monomial.as_deref().ok_or_else(|| InputError("--monomial is required".into()))?;
    let syms = parse_monomial(&p, text)?;
    let n = args.n_max;
    let mut r = Report::new("straighten", &["step", "monomial", "rule", "measure", "outputs"]);
    let input = StraightPoly::monomial(Monomial::from_symbols(&syms));
    match straighten_certified(&p, &input, n, 100_000) {
        Ok(cert) => {
            for (i, s) in cert.steps.iter().enumerate() {
                let rule = match s.rule {
                    Rule::Kill { position } => format!("kill@{position}"),
                    Rule::UnitDrop { position } => format!("unit-drop@{position}"),
                    Rule::UnitKill { position } => format!("unit-kill@{position}"),
                    Rule::Rewrite { position } => format!("rewrite@{position}"),
                };
                r.push_row(vec![
                    i.to_string(),
                    format!("{}*{}", fmt_q(&s.coefficient), s.monomial.render(&p)),
                    rule,
                    format!("({}, {})", s.measure.0, s.measure.1),
                    s.outputs.len().to_string(),
                ]);
            }
            r.note(format!("level {n}, result {}", cert.result.render(&p)));
            if let Err(e) = replay_certificate(&p, &cert) {
                r.note(format!("replay failed: {e}"));
                r.degrade(Status::Fail);
            }
            if !cert.result.is_normal(&p, n) {
                r.note("result is not in normal form");
                r.degrade(Status::Fail);
            }
        }
        Err(e) => absorb(&mut r, "straighten", e),
    }
    Ok(r)
}

fn surjection_check(args: &Args) -> Run<Report> {
    let voa = load_voa_input(args)?;
    let w = window(args, &voa)?;
    let mut r = Report::new("surjection-check", &["n", "d", "dim_Q", "converged", "bound", "c2_finite", "verdict"]);
    for n in 0..=args.n_max {
        for d in args.d_min..=args.d_max {
            match psi_surjection_check(&voa, n, d, &w) {
                Ok(s) => {
                    r.push_row(vec![
                        n.to_string(),
                        d.to_string(),
                        s.q_dim.to_string(),
                        yes_no(s.q_converged),
                        s.bound.map_or("-".into(), |b| b.to_string()),
                        yes_no(s.c2_finite_within_window),
                        s.verdict.label().into(),
                    ]);
                    for f in &s.generator_failures {
                        r.note(format!("n={n} d={d}: {f}"));
                    }
                    r.degrade(match s.verdict {
                        Verdict::Pass => Status::Pass,
                        Verdict::Fail => Status::Fail,
                        Verdict::Inconclusive => Status::Inconclusive,
                    });
                }
                Err(e) => absorb(&mut r, &format!("n={n} d={d}"), e),
            }
        }
    }
    Ok(r)
}

fn functor_rows(r: &mut Report, name: &str, g: &GradedAlgebra, cap: Option<i64>) {
    let gap = g.gap();
    let cap = cap.unwrap_or_else(|| g.cap());
    for n in gap..=(cap - gap) {
        let (a_n, _) = match g.a_n(n) {
            Ok(a) => a,
            Err(e) => return absorb(r, name, e),
        };
        let mut tops: Vec<_> = a_n.labels.iter().filter(|(l, m)| l == m).map(|(l, _)| l.clone()).collect();
        tops.dedup();
        let mut modules = vec![("regular".to_string(), FinModule::regular(&a_n))];
        for t in &tops {
            modules.push((format!("P({})", fmt_q(t)), FinModule::quotient_of_free(&a_n, std::slice::from_ref(t), &[])));
        }
        for (label, x) in modules {
            match round_trip_check(g, &x, n, cap) {
                Ok(rt) => {
                    r.push_row(vec![
                        name.into(),
                        n.to_string(),
                        label,
                        rt.dim_x.to_string(),
                        rt.dim_en.to_string(),
                        yes_no(rt.isomorphism),
                    ]);
                    if !rt.isomorphism {
                        r.note(format!("{name} n={n}: {}", rt.witness.unwrap_or_default()));
                        r.degrade(Status::Fail);
                    }
                }
                Err(e) => absorb(r, &format!("{name} n={n}"), e),
            }
        }
    }
}

fn functor_check(args: &Args) -> Run<Report> {
    let mut r = Report::new("functor-check", &["algebra", "n", "module", "dim_X", "dim_E_n", "iso"]);
    match &args.input {
        Some(_) => {
            let voa = load_voa_input(args)?;
            let w = window(args, &voa)?;
            match extract_finite_algebra(&voa, args.n_max, args.n_max, &w) {
                Ok(a) => {
                    let g = GradedAlgebra::new(a);
                    functor_rows(&mut r, &format!("A_{}", args.n_max), &g, args.cap);
                }
                Err(e) => absorb(&mut r, "extract", e),
            }
        }
        None => {
            for (name, g) in synthetic_algebras() {
                functor_rows(&mut r, name, &g, args.cap);
            }
        }
    }
    Ok(r)
}

fn run(args: &Args) -> Run<Report> {
    check_ranges(args)?;
    match args.command {
        Command::CheckAxioms => check_axioms(args),
        Command::Borcherds => borcherds(args),
        Command::QuotientDims => quotient_dims(args),
        Command::Spectrum => spectrum_cmd(args),
        Command::FiniteAlgebra => finite_algebra(args),
        Command::ZhuPoisson => zhu_poisson(args),
        Command::PcaBounds => pca_bounds(args),
        Command::Straighten => straighten_cmd(args),
        Command::SurjectionCheck => surjection_check(args),
        Command::FunctorCheck => functor_check(args),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let report = match run(&args) {
        Ok(r) => r,
        Err(InputError(msg)) => {
            eprintln!("input error: {msg}");
            return ExitCode::from(3);
        }
    };
    let text = match args.format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json(),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("input error: {}: {e}", path.display());
                return ExitCode::from(3);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.status.exit_code() as u8)
}
