use std::fmt::Write as _;

use num_complex::Complex64 as C;
use transferkit::oracles::{
    classical_transfer_free_energy, gibbs_marginal_bruteforce, xy_exact, xy_exact_cross_checked,
};
use transferkit::thermo::{self, budget_window, choose_l, two_sided_marginal_from, two_sided_model, WindowRule};
use transferkit::{models, ChainModel, Matrix, MemoryBudget, Scalar, SpectralResult};

use crate::failure::{Failure, Outcome, MARGINAL_TOO_LARGE, MISMATCH, NO_CONVERGENCE};
use crate::model_file::{write_json, MarginalDump, Model};
use crate::{emit, with_chain};
use crate::{Builtin, CompareArgs, Format, FreeEnergyArgs, MarginalArgs, ModelArgs, OracleArgs, OracleModel};

/// Window from an explicit size or from a target accuracy and the memory budget.
pub fn resolve_window(window: Option<usize>, epsilon: Option<f64>, model: &Model) -> Outcome<usize> {
    match (window, epsilon) {
        (Some(w), None) => Ok(w),
        (None, Some(eps)) => {
            let elem = if model.is_real() { 8 } else { 16 };
            let budget_l = budget_window(model.site_dim(), &MemoryBudget::from_env(), elem);
            Ok(choose_l(eps, WindowRule::Practical { budget_l })?)
        }
        _ => Err(Failure::malformed("give exactly one of --L and --epsilon")),
    }
}

pub fn check_marginal(k: usize, window: usize) -> Outcome<()> {
    if k == 0 {
        return Err(Failure::malformed("marginal size must be at least 1"));
    }
    if k >= window {
        return Err(Failure::new(
            MARGINAL_TOO_LARGE,
            format!("marginal size {k} must be smaller than the window {window}"),
        ));
    }
    Ok(())
}

pub fn relative_residual<T: Scalar<Re = f64>>(s: &SpectralResult<T>) -> f64 {
    s.residual / s.radius
}

pub fn not_converged<T: Scalar<Re = f64>>(s: &SpectralResult<T>) -> Failure {
    Failure::new(
        NO_CONVERGENCE,
        format!(
            "power iteration stopped after {} iterations without converging (relative residual {:e}, Hilbert gap {:e})",
            s.iterations,
            relative_residual(s),
            s.hilbert_gap
        ),
    )
}

struct Record {
    value: f64,
    window: usize,
    residual: f64,
    iterations: usize,
    converged: bool,
    wall_time_s: f64,
}

pub fn free_energy(a: &FreeEnergyArgs) -> Outcome<()> {
    let model = Model::load(&a.model)?;
    let chain = model.chain(a.beta)?;
    let window = resolve_window(a.window, a.epsilon, &model)?;
    let opts = a.solver.options();
    let (rec, failure) = with_chain!(&chain, c => {
        let est = thermo::free_energy(c, window, &opts)?;
        let s = &est.spectral;
        let rec = Record {
            value: est.value,
            window,
            residual: relative_residual(s),
            iterations: s.iterations,
            converged: s.converged,
            wall_time_s: est.wall_time_s,
        };
        (rec, (!s.converged).then(|| not_converged(s)))
    });
    let mut out = String::new();
    match a.format {
        Format::Csv => {
            out.push_str("beta,L,free_energy,residual,iterations,converged,wall_time_s\n");
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{},{:.6}",
                a.beta, rec.window, rec.value, rec.residual, rec.iterations, rec.converged, rec.wall_time_s
            );
        }
        Format::Table => {
            let _ = writeln!(out, "free_energy  {:.16e}", rec.value);
            let _ = writeln!(out, "beta         {}", a.beta);
            let _ = writeln!(out, "L            {}", rec.window);
            let _ = writeln!(out, "residual     {:.3e}", rec.residual);
            let _ = writeln!(out, "iterations   {}", rec.iterations);
            let _ = writeln!(out, "converged    {}", rec.converged);
            let _ = writeln!(out, "wall_time_s  {:.3}", rec.wall_time_s);
        }
    }
    emit(&out, None)?;
    failure.map_or(Ok(()), Err)
}

fn marginal_of<T: Scalar<Re = f64>>(
    chain: &ChainModel<T>,
    a: &MarginalArgs,
) -> Outcome<(MarginalDump, Option<Failure>)> {
    let opts = a.solver.options();
    let (spectral, rho) = if a.two_sided {
        let doubled = two_sided_model(chain)?;
        let s = thermo::leading_eigenvector(&doubled, a.window, &opts)?;
        let rho = two_sided_marginal_from(&s, chain.local_dim(), a.k)?;
        (s, rho)
    } else {
        let s = thermo::leading_eigenvector(chain, a.window, &opts)?;
        let rho = thermo::marginal_from(&s, a.k)?;
        (s, rho)
    };
    let side = if a.two_sided { " two-sided" } else { "" };
    let source = format!("transfer{side} L={} beta={}", a.window, a.beta);
    Ok((
        MarginalDump::new(&rho, source)?,
        (!spectral.converged).then(|| not_converged(&spectral)),
    ))
}

pub fn marginal(a: &MarginalArgs) -> Outcome<()> {
    let model = Model::load(&a.model)?;
    let chain = model.chain(a.beta)?;
    check_marginal(a.k, a.window)?;
    let (dump, failure) = with_chain!(&chain, c => marginal_of(c, a)?);
    write_json(&dump, a.output.as_deref())?;
    failure.map_or(Ok(()), Err)
}

pub fn compare(a: &CompareArgs) -> Outcome<()> {
    let first = MarginalDump::load(&a.first)?;
    let second = MarginalDump::load(&a.second)?;
    if (first.d, first.sites) != (second.d, second.sites) {
        return Err(Failure::malformed(format!(
            "cannot compare {} sites of dimension {} with {} sites of dimension {}",
            first.sites, first.d, second.sites, second.d
        )));
    }
    let dist = first.density()?.trace_distance(&second.density()?)?;
    emit(&format!("trace_distance {dist:.16e}\n"), None)?;
    match a.tol {
        Some(tol) if !(dist <= tol) => Err(Failure::new(
            MISMATCH,
            format!("trace distance {dist:e} exceeds {tol:e}"),
        )),
        _ => Ok(()),
    }
}

fn bruteforce_dump(chain: &ChainModel<f64>, k: usize, length: usize, beta: f64) -> Outcome<MarginalDump> {
    let rho = gibbs_marginal_bruteforce(chain, k + 1, length)?;
    MarginalDump::new(&rho, format!("bruteforce length={length} beta={beta}"))
}

pub fn oracle(a: &OracleArgs) -> Outcome<()> {
    let (name, beta, parameter, marginal) = match &a.model {
        OracleModel::Xy {
            beta, gamma, marginal, ..
        } => ("xy", *beta, *gamma, marginal),
        OracleModel::Ising { beta, j, marginal } => ("ising", *beta, *j, marginal),
    };
    if let (Some(k), Some(length)) = (marginal.marginal, marginal.length) {
        let chain = match &a.model {
            OracleModel::Xy { .. } => models::xy::<f64>(parameter, beta)?,
            OracleModel::Ising { .. } => models::ising::<f64>(parameter, beta)?,
        };
        return write_json(&bruteforce_dump(&chain, k, length, beta)?, marginal.output.as_deref());
    }
    let beta_f = match &a.model {
        OracleModel::Xy { cross_check: true, .. } => xy_exact_cross_checked(beta, parameter)?,
        OracleModel::Xy { .. } => xy_exact(beta, parameter)?,
        // beta f depends on beta J only, so evaluate at unit beta
        OracleModel::Ising { .. } => {
            let h = models::zz::<f64>().scaled_real(-beta * parameter);
            classical_transfer_free_energy(&h, 2, 1.0)?
        }
    };
    let text = format!("model,beta,parameter,beta_f_per_spin\n{name},{beta},{parameter},{beta_f:.16e}\n");
    emit(&text, marginal.output.as_deref())
}

pub fn builtin(b: Builtin) -> Outcome<Model> {
    Ok(match b {
        Builtin::Zero { d } => {
            let n = d
                .checked_mul(d)
                .ok_or_else(|| Failure::malformed("local dimension too large"))?;
            Model::single(d, Matrix::zeros(n), "zero")
        }
        Builtin::Ising { j } => Model::single(2, models::zz::<C>().scaled_real(-j), "ising"),
        Builtin::Xy { gamma } => {
            if !(gamma >= 0.0) || !gamma.is_finite() {
                return Err(Failure::malformed(format!(
                    "gamma must be a non-negative number, got {gamma}"
                )));
            }
            Model::xy(gamma, false)
        }
        Builtin::Potts { d, j } => Model::single(d, models::potts::<C>(d, j, 1.0)?.h().matrix().clone(), "potts"),
    })
}

pub fn model(a: &ModelArgs) -> Outcome<()> {
    write_json(&builtin(a.builtin)?.to_file(), a.output.as_deref())
}
