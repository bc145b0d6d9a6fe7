//! Parameter sweeps. Points are evaluated on a worker pool and emitted in
//! input order as CSV.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use transferkit::thermo::{
    self, conditional_mutual_information, mutual_information, two_sided_marginal_from, two_sided_model, LogBase,
};
use transferkit::{ChainModel, DensityMatrix, Scalar};

use crate::commands::{check_marginal, not_converged, relative_residual, resolve_window};
use crate::failure::{Failure, Outcome, MARGINAL_TOO_LARGE};
use crate::model_file::Model;
use crate::{emit, with_chain, SolverArgs};

pub const HEADER: &str = "param,value,quantity,diagnostic_residual,wall_time_s";

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    #[value(name = "beta")]
    Beta,
    #[value(name = "L")]
    Window,
    #[value(name = "gamma")]
    Gamma,
    #[value(name = "distance")]
    Distance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Free energy per site.
    #[value(name = "free_energy")]
    FreeEnergy,
    /// Energy per bond of the two-sided chain.
    #[value(name = "energy")]
    Energy,
    /// Mutual information between two sites of the two-sided chain.
    #[value(name = "mi")]
    Mi,
    /// The same, conditioned on the other sites of the marginal.
    #[value(name = "cmi")]
    Cmi,
    /// Distance of the free energy from the exact value.
    #[value(name = "error_vs_oracle")]
    ErrorVsOracle,
}

impl Quantity {
    fn name(self) -> &'static str {
        match self {
            Self::FreeEnergy => "free_energy",
            Self::Energy => "energy",
            Self::Mi => "mi",
            Self::Cmi => "cmi",
            Self::ErrorVsOracle => "error_vs_oracle",
        }
    }

    fn entropic(self) -> bool {
        matches!(self, Self::Mi | Self::Cmi)
    }
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub param: Param,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub values: Vec<f64>,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "L", id = "window")]
    pub window: Option<usize>,
    #[arg(long, conflicts_with = "window")]
    pub epsilon: Option<f64>,
    /// Dimerization, for models of the XY family.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Site separation for mi and cmi.
    #[arg(long)]
    pub distance: Option<usize>,
    /// Sites per side of the two-sided marginal used for mi and cmi.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Leave the wall-time column empty, for byte-identical reruns.
    #[arg(long)]
    pub omit_timing: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug)]
struct Point {
    beta: Option<f64>,
    window: Option<usize>,
    gamma: Option<f64>,
    distance: Option<usize>,
}

struct Value {
    value: f64,
    residual: f64,
}

/// A failed point, with the solver residual when it got that far.
struct Miss {
    failure: Failure,
    residual: Option<f64>,
}

impl From<Failure> for Miss {
    fn from(failure: Failure) -> Self {
        Self {
            failure,
            residual: None,
        }
    }
}

impl From<transferkit::Error> for Miss {
    fn from(e: transferkit::Error) -> Self {
        Failure::from(e).into()
    }
}

type PointResult = Result<Value, Miss>;

/// Two-sided marginal in complex arithmetic, with the relative residual of
/// the eigenvector it came from.
struct Marginal {
    rho: DensityMatrix<C>,
    residual: f64,
}

fn two_sided<T: Scalar<Re = f64>>(
    chain: &ChainModel<T>,
    window: usize,
    k: usize,
    a: &SweepArgs,
) -> Result<Marginal, Miss> {
    let doubled = two_sided_model(chain)?;
    let s = thermo::leading_eigenvector(&doubled, window, &a.solver.options())?;
    let residual = relative_residual(&s);
    if !s.converged {
        return Err(Miss {
            failure: not_converged(&s),
            residual: Some(residual),
        });
    }
    let rho = two_sided_marginal_from(&s, chain.local_dim(), k)?;
    let rho = DensityMatrix::new(rho.matrix().to_c64(), rho.local_dim(), rho.n_sites())?;
    Ok(Marginal { rho, residual })
}

/// Sites `a < c` at separation `distance`, centred on the fold of a two-sided
/// marginal with `k` sites per side; the rest of the marginal is the
/// conditioning system.
fn entropic(m: &Marginal, k: usize, distance: usize, quantity: Quantity) -> PointResult {
    let n = 2 * k;
    let half = (distance.max(1) - 1) / 2;
    if distance == 0 || half >= k || k - 1 - half + distance >= n {
        return Err(Failure::new(
            MARGINAL_TOO_LARGE,
            format!("distance {distance} does not fit in a marginal of {k} sites per side"),
        )
        .into());
    }
    let a = k - 1 - half;
    let c = a + distance;
    let value = if quantity == Quantity::Mi {
        mutual_information(&m.rho, &[a], &[c], LogBase::Natural)?
    } else {
        let rest: Vec<usize> = (0..n).filter(|&s| s != a && s != c).collect();
        conditional_mutual_information(&m.rho, &[a], &rest, &[c], LogBase::Natural)?
    };
    Ok(Value {
        value,
        residual: m.residual,
    })
}

struct Sweep<'a> {
    args: &'a SweepArgs,
    model: Model,
}

impl Sweep<'_> {
    fn model_at(&self, p: Point) -> Outcome<Model> {
        match p.gamma {
            Some(g) => self.model.with_gamma(g),
            None => Ok(self.model.clone()),
        }
    }

    fn window_at(&self, p: Point, model: &Model) -> Outcome<usize> {
        resolve_window(p.window, self.args.epsilon, model)
    }

    fn evaluate(&self, p: Point, shared: Option<&Result<Marginal, Miss>>) -> PointResult {
        let a = self.args;
        if let (Some(shared), Some(distance)) = (shared, p.distance) {
            return match shared {
                Ok(m) => entropic(m, a.k, distance, a.quantity),
                Err(miss) => Err(Miss {
                    failure: miss.failure.clone(),
                    residual: miss.residual,
                }),
            };
        }
        let beta = p.beta.ok_or_else(|| Failure::malformed("--beta is required"))?;
        let model = self.model_at(p)?;
        let window = self.window_at(p, &model)?;
        let chain = model.chain(beta)?;
        match a.quantity {
            Quantity::FreeEnergy | Quantity::ErrorVsOracle => {
                let (value, s_residual, failure) = with_chain!(&chain, c => {
                    let est = thermo::free_energy(c, window, &a.solver.options())?;
                    let s = &est.spectral;
                    (est.value, relative_residual(s), (!s.converged).then(|| not_converged(s)))
                });
                if let Some(failure) = failure {
                    return Err(Miss {
                        failure,
                        residual: Some(s_residual),
                    });
                }
                let value = if a.quantity == Quantity::ErrorVsOracle {
                    (value - model.oracle_free_energy(beta)?).abs()
                } else {
                    value
                };
                Ok(Value {
                    value,
                    residual: s_residual,
                })
            }
            Quantity::Energy => {
                let m = with_chain!(&chain, c => two_sided(c, window, 1, a)?);
                let h = with_chain!(&chain, c => c.h().matrix().to_c64());
                Ok(Value {
                    value: m.rho.expectation(&h)?,
                    residual: m.residual,
                })
            }
            Quantity::Mi | Quantity::Cmi => {
                check_marginal(a.k, window)?;
                let distance = p.distance.ok_or_else(|| Failure::malformed("--distance is required"))?;
                let m = with_chain!(&chain, c => two_sided(c, window, a.k, a)?);
                entropic(&m, a.k, distance, a.quantity)
            }
        }
    }

    /// The one marginal a distance sweep needs.
    fn shared_marginal(&self, p: Point) -> Result<Marginal, Miss> {
        let a = self.args;
        let beta = p.beta.ok_or_else(|| Failure::malformed("--beta is required"))?;
        let model = self.model_at(p)?;
        let window = self.window_at(p, &model)?;
        check_marginal(a.k, window)?;
        let chain = model.chain(beta)?;
        with_chain!(&chain, c => two_sided(c, window, a.k, a))
    }
}

fn as_count(v: f64, what: &str, min: usize) -> Outcome<usize> {
    if v.fract() != 0.0 || v < min as f64 || v > u32::MAX as f64 {
        return Err(Failure::malformed(format!(
            "{what} values must be integers >= {min}, got {v}"
        )));
    }
    Ok(v as usize)
}

fn points(a: &SweepArgs) -> Outcome<Vec<Point>> {
    if a.values.is_empty() {
        return Err(Failure::malformed("--values is empty"));
    }
    if a.values.iter().any(|v| !v.is_finite()) || a.values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Failure::malformed("--values must be finite and strictly increasing"));
    }
    let base = Point {
        beta: a.beta,
        window: a.window,
        gamma: a.gamma,
        distance: a.distance,
    };
    a.values
        .iter()
        .map(|&v| {
            let mut p = base;
            match a.param {
                Param::Beta => p.beta = Some(v),
                Param::Window => p.window = Some(as_count(v, "L", 2)?),
                Param::Gamma => p.gamma = Some(v),
                Param::Distance => p.distance = Some(as_count(v, "distance", 1)?),
            }
            Ok(p)
        })
        .collect()
}

/// Rejects combinations that would fail at every point.
fn validate(a: &SweepArgs, model: &Model) -> Outcome<()> {
    if a.param != Param::Beta && a.beta.is_none() {
        return Err(Failure::malformed("--beta is required unless sweeping beta"));
    }
    if a.param != Param::Window && a.window.is_none() && a.epsilon.is_none() {
        return Err(Failure::malformed("give --L or --epsilon unless sweeping L"));
    }
    if a.param == Param::Window && a.epsilon.is_some() {
        return Err(Failure::malformed("--epsilon conflicts with an L sweep"));
    }
    if a.param == Param::Distance && !a.quantity.entropic() {
        return Err(Failure::malformed("a distance sweep needs --quantity mi or cmi"));
    }
    if a.quantity.entropic() && a.param != Param::Distance && a.distance.is_none() {
        return Err(Failure::malformed("mi and cmi need --distance unless sweeping it"));
    }
    let model = if a.param == Param::Gamma || a.gamma.is_some() {
        model.with_gamma(a.gamma.unwrap_or(1.0))?
    } else {
        model.clone()
    };
    if a.quantity == Quantity::ErrorVsOracle {
        model.oracle_free_energy(1.0)?;
    }
    if a.threads == Some(0) {
        return Err(Failure::malformed("--threads must be at least 1"));
    }
    Ok(())
}

fn format_param(p: Param, v: f64) -> String {
    match p {
        Param::Window | Param::Distance => format!("{}", v as usize),
        Param::Beta | Param::Gamma => format!("{v}"),
    }
}

pub fn run(a: &SweepArgs) -> Outcome<()> {
    let model = Model::load(&a.model)?;
    validate(a, &model)?;
    let pts = points(a)?;
    let sweep = Sweep { args: a, model };
    let threads = a
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::malformed(format!("cannot start worker pool: {e}")))?;

    let shared = (a.param == Param::Distance).then(|| sweep.shared_marginal(pts[0]));
    let rows: Vec<(PointResult, f64)> = pool.install(|| {
        pts.par_iter()
            .map(|&p| {
                let start = Instant::now();
                let r = sweep.evaluate(p, shared.as_ref());
                (r, start.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut out = String::from(HEADER);
    out.push('\n');
    let mut first_failure: Option<Failure> = None;
    let mut failed = 0;
    for ((r, secs), &v) in rows.into_iter().zip(&a.values) {
        let param = format_param(a.param, v);
        let time = if a.omit_timing {
            String::new()
        } else {
            format!("{secs:.6}")
        };
        let (value, residual) = match r {
            Ok(x) => (format!("{:.16e}", x.value), format!("{:.16e}", x.residual)),
            Err(miss) => {
                eprintln!("transferkit: {}={param}: {}", a.param.name(), miss.failure);
                failed += 1;
                let residual = miss.residual.map_or("inf".to_string(), |r| format!("{r:.16e}"));
                first_failure.get_or_insert(miss.failure);
                (String::new(), residual)
            }
        };
        let _ = writeln!(out, "{param},{value},{},{residual},{time}", a.quantity.name());
    }
    emit(&out, a.output.as_deref())?;
    match first_failure {
        Some(f) => Err(Failure::new(
            f.code,
            format!(
                "{failed} of {} sweep points failed; first: {}",
                a.values.len(),
                f.message
            ),
        )),
        None => Ok(()),
    }
}

impl Param {
    fn name(self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::Window => "L",
            Self::Gamma => "gamma",
            Self::Distance => "distance",
        }
    }
}
