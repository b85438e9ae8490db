use std::sync::Arc;

use realclone::bound::real_optimal_tan_phi;
use realclone::cloner::{clone, clone_fidelity, CloneMap};
use realclone::constraints::ConstraintReport;
use realclone::family::{ClonerFamilies, ClonerFamily};
use realclone::optimize::{numeric_optimize_with, Settings};
use realclone::space::RealState;
use realclone::tensor::{SpectralBases, Which};
use realclone::verify::{CheckRegistry, Fault};

use crate::args::{
    figure_dims, max_dim, parse_dims, parse_state, BoundArgs, CloneArgs, FaultArg, FigureArgs, OptimizeArgs,
    VerifyArgs,
};
use crate::report::{Record, Report, Value};

/// Largest `|gap|` accepted before `optimize` reports a regression.
pub const GAP_GUARD: f64 = 1e-5;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments; exit code 2.
    Usage(String),
    /// A computation failed; exit code 1.
    Failure(String),
}

impl From<realclone::Error> for CliError {
    fn from(e: realclone::Error) -> Self {
        match e {
            realclone::Error::Dimension { .. } | realclone::Error::UnknownName { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

pub struct Outcome {
    pub report: Report,
    /// All checks and guards passed.
    pub ok: bool,
    pub warnings: Vec<String>,
}

fn family(name: &str) -> Result<Arc<dyn ClonerFamily>, CliError> {
    Ok(ClonerFamilies::default().get(name)?)
}

fn at_least_one(name: &str, value: usize) -> Result<(), CliError> {
    if value == 0 {
        return Err(CliError::Usage(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn dims(raw: &str) -> Result<Vec<usize>, CliError> {
    let max = max_dim().map_err(CliError::Usage)?;
    parse_dims(raw, max).map_err(CliError::Usage)
}

pub fn bound(args: &BoundArgs) -> Result<Outcome, CliError> {
    let dims = dims(&args.d)?;
    let fam = family(&args.family)?;
    let mut results = Vec::new();
    for d in dims {
        let b = fam.analytic_bound(d)?;
        let mut r = Record::new().with("d", d).with("family", b.family).with("f_max", b.f_max);
        if let Some(phi) = b.optimal_phi {
            r.push("optimal_phi", phi);
            r.push("tan_optimal_phi", real_optimal_tan_phi(d));
        }
        r.push("expression", b.expression);
        results.push(r);
    }
    Ok(Outcome {
        report: Report {
            command: "bound",
            config: Record::new().with("d", args.d.clone()).with("family", fam.name()),
            results,
            residuals: Record::new(),
            notes: vec![],
            tabular: false,
        },
        ok: true,
        warnings: vec![],
    })
}

pub fn optimize(args: &OptimizeArgs) -> Result<Outcome, CliError> {
    let dims = dims(&args.d)?;
    let fam = family(&args.family)?;
    let basis = SpectralBases::default().get(&args.basis)?;
    at_least_one("restarts", args.restarts)?;
    at_least_one("trials", args.trials)?;
    let settings = Settings {
        restarts: args.restarts,
        seed: args.common.seed,
        ..Settings::default()
    };
    let mut results = Vec::new();
    let mut residuals = Record::new();
    let mut ok = true;
    for d in dims {
        let r = numeric_optimize_with(d, fam.as_ref(), basis.as_ref(), &settings)?;
        let report = r.constraint_report(basis.clone(), args.trials, args.common.seed)?;
        let p = r.best_params;
        let within = r.gap_to_analytic.abs() <= GAP_GUARD;
        ok &= within && report.all_passed();
        results.push(
            Record::new()
                .with("d", d)
                .with("family", r.family)
                .with("f_numeric", r.f_numeric)
                .with("f_analytic", r.f_analytic)
                .with("gap_to_analytic", r.gap_to_analytic)
                .with("case", r.case_label.to_string())
                .with("lambda_a", p.lambda_a)
                .with("lambda_b", p.lambda_b)
                .with("lambda_c", p.lambda_c)
                .with("lambda_d", p.lambda_d)
                .with("lambda_e", p.lambda_e)
                .with("alpha", p.alpha)
                .with("phi", p.phi)
                .with("theta", p.theta)
                .with("case_a_best", r.case_a_best)
                .with("case_b_best", r.case_b_best)
                .with("restarts_used", r.restarts_used)
                .with("constraints", report.all_passed()),
        );
        residuals.push(format!("gap_d{d}"), r.gap_to_analytic);
        residuals.push(format!("min_eigenvalue_d{d}"), report.positive.value);
        residuals.push(format!("trace_d{d}"), report.unit_trace.value);
        residuals.push(format!("k7_d{d}"), report.no_signaling.k7);
    }
    let mut notes = Vec::new();
    if !ok {
        notes.push(format!("FAIL: gap above {GAP_GUARD:e} or constraint violated"));
    }
    Ok(Outcome {
        report: Report {
            command: "optimize",
            config: Record::new()
                .with("d", args.d.clone())
                .with("family", fam.name())
                .with("basis", basis.name())
                .with("restarts", args.restarts)
                .with("seed", args.common.seed)
                .with("trials", args.trials),
            results,
            residuals,
            notes,
            tabular: false,
        },
        ok,
        warnings: vec![],
    })
}

pub fn clone_cmd(args: &CloneArgs) -> Result<Outcome, CliError> {
    let parsed = parse_state(&args.state).map_err(CliError::Usage)?;
    let len = parsed.amplitudes.len();
    let d = match &args.d {
        Some(raw) => {
            let d = *dims(raw)?
                .first()
                .filter(|_| !raw.contains(".."))
                .ok_or_else(|| CliError::Usage("clone takes a single dimension".into()))?;
            if d != len {
                return Err(CliError::Usage(format!("--state has {len} amplitudes but --d is {d}")));
            }
            d
        }
        None => dims(&len.to_string())?[0],
    };
    at_least_one("trials", args.trials)?;
    let fam = family(&args.family)?;
    let coeffs = fam.coefficients(d)?;
    let n = RealState::from_slice(&parsed.amplitudes)?;
    let psi = clone(&n, &coeffs)?;
    let rho = psi.two_clone_density();
    let f_formula = clone_fidelity(&coeffs);
    let f_state = rho.fidelity(&n)?;
    let marginal = rho.clone_marginal(Which::First);
    let rows: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| marginal.matrix()[(i, j)].re).collect()).collect();
    let report = ConstraintReport::evaluate(&CloneMap(coeffs), args.trials, args.common.seed)?;
    let ok = report.all_passed();

    let result = Record::new()
        .with("d", d)
        .with("family", fam.name())
        .with("a", coeffs.a)
        .with("c", coeffs.c)
        .with("fidelity", f_formula)
        .with("fidelity_from_state", f_state)
        .with("output_norm", psi.norm())
        .with("marginal", Value::Matrix(rows))
        .with("positive", report.positive.passed)
        .with("min_eigenvalue", report.positive.value)
        .with("unit_trace", report.unit_trace.passed)
        .with("trace", report.unit_trace.value)
        .with("no_signaling", report.no_signaling.passed)
        .with("k7", report.no_signaling.k7)
        .with("max_mixture_deviation", report.no_signaling.max_deviation)
        .with("covariant", report.covariant.passed)
        .with("covariance_residual", report.covariant.value)
        .with("swap_symmetric", report.swap_symmetric.passed)
        .with("swap_residual", report.swap_symmetric.value);
    Ok(Outcome {
        report: Report {
            command: "clone",
            config: Record::new()
                .with("d", d)
                .with("family", fam.name())
                .with("state", args.state.clone())
                .with("seed", args.common.seed)
                .with("trials", args.trials),
            results: vec![result],
            residuals: Record::new()
                .with("fidelity_paths", (f_formula - f_state).abs())
                .with("marginal_form", marginal.shrunk_form_residual(&n, f_formula))
                .with("max_mixture_deviation", report.no_signaling.max_deviation)
                .with("covariance", report.covariant.value)
                .with("swap", report.swap_symmetric.value),
            notes: if ok { vec![] } else { vec!["FAIL: constraint violated".into()] },
            tabular: false,
        },
        ok,
        warnings: parsed.warning.into_iter().collect(),
    })
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let dims = dims(&args.d)?;
    at_least_one("trials", args.trials)?;
    let fault = match args.inject_fault {
        FaultArg::None => Fault::None,
        FaultArg::NegativeLambda => Fault::NegativeLambda,
    };
    let outcomes = CheckRegistry::default().run_all(&dims, args.trials, args.common.seed, fault)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let mut residuals = Record::new();
    let results = outcomes
        .iter()
        .map(|o| {
            residuals.push(format!("{}_d{}", o.name, o.d), o.worst);
            Record::new()
                .with("d", o.d)
                .with("check", o.name)
                .with("passed", o.passed)
                .with("worst", o.worst)
                .with("tolerance", o.tolerance)
                .with("trials", o.trials)
        })
        .collect();
    let summary = if failed == 0 {
        format!("all {} checks passed", outcomes.len())
    } else {
        format!("FAIL: {failed} of {} checks failed", outcomes.len())
    };
    Ok(Outcome {
        report: Report {
            command: "verify",
            config: Record::new()
                .with("d", args.d.clone())
                .with("trials", args.trials)
                .with("seed", args.common.seed),
            results,
            residuals,
            notes: vec![summary],
            tabular: true,
        },
        ok: failed == 0,
        warnings: vec![],
    })
}

pub fn figure(args: &FigureArgs) -> Result<Outcome, CliError> {
    let max = max_dim().map_err(CliError::Usage)?;
    let dims = figure_dims(args, max).map_err(CliError::Usage)?;
    let families = ClonerFamilies::default();
    let (real, universal) = (families.get("real")?, families.get("universal")?);
    let mut results = Vec::new();
    let mut ok = true;
    for d in &dims {
        let fr = real.analytic_bound(*d)?.f_max;
        let fu = universal.analytic_bound(*d)?.f_max;
        ok &= fr > fu;
        results.push(Record::new().with("d", *d).with("F_real", fr).with("F_universal", fu));
    }
    Ok(Outcome {
        report: Report {
            command: "figure",
            config: Record::new().with("dmin", dims[0]).with("dmax", dims[dims.len() - 1]),
            results,
            residuals: Record::new(),
            notes: vec![],
            tabular: false,
        },
        ok,
        warnings: vec![],
    })
}
