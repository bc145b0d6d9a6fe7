//! JSON model files and density-matrix dumps.
//!
//! Matrices are nested row-major arrays of `[re, im]` pairs. Doubles are
//! written in shortest round-trip form, so a file read back reproduces the
//! exact bits.

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use transferkit::chain::block_sites;
use transferkit::oracles::{classical_transfer_free_energy, xy_exact};
use transferkit::{models, ChainModel, DensityMatrix, HermitianOperator, Matrix, Scalar, SiteInterval};

use crate::failure::{Failure, Outcome};

pub type Entries = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    /// Local dimension of one site.
    pub d: usize,
    /// Two-site term, `d^2 x d^2`. Absent when `blocking` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocking: Option<Blocking>,
}

/// A chain with period `p` in the bond terms, blocked into cells of `p`
/// sites. `terms[j]` acts on bond `(j, j+1)` of a period.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Blocking {
    pub terms: Vec<Entries>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MarginalDump {
    pub d: usize,
    pub sites: usize,
    pub rho: Entries,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone)]
enum Terms {
    Single(Matrix<C>),
    Blocked(Vec<Matrix<C>>),
}

/// Which reference oracle, if any, applies to a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Diagonal `h`: the classical transfer matrix is exact.
    Classical,
    /// `scale` times the XY bond, with alternating couplings `1, gamma`.
    Xy {
        scale: f64,
        gamma: f64,
    },
    Other,
}

#[derive(Debug, Clone)]
pub struct Model {
    d: usize,
    name: Option<String>,
    terms: Terms,
}

/// A chain in real arithmetic when every entry is real.
pub enum AnyChain {
    Real(ChainModel<f64>),
    Complex(ChainModel<C>),
}

#[macro_export]
macro_rules! with_chain {
    ($any:expr, $c:ident => $body:expr) => {
        match $any {
            $crate::model_file::AnyChain::Real($c) => $body,
            $crate::model_file::AnyChain::Complex($c) => $body,
        }
    };
}

fn to_matrix(entries: &Entries, n: usize, what: &str) -> Outcome<Matrix<C>> {
    if entries.len() != n || entries.iter().any(|row| row.len() != n) {
        return Err(Failure::malformed(format!("{what} must be a {n}x{n} matrix")));
    }
    let rows: Vec<Vec<C>> = entries
        .iter()
        .map(|row| row.iter().map(|&[re, im]| C::new(re, im)).collect())
        .collect();
    Ok(Matrix::from_rows(&rows)?)
}

pub fn to_entries<T: Scalar>(m: &Matrix<T>) -> Entries {
    m.to_rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|z| {
                    // adding zero turns -0.0 into 0.0
                    let z = z.to_c64();
                    [z.re + 0.0, z.im + 0.0]
                })
                .collect()
        })
        .collect()
}

fn read_json<D: for<'a> Deserialize<'a>>(path: &Path) -> Outcome<D> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("{}: {e}", path.display())))
}

fn narrow<T: Scalar>(m: &Matrix<C>) -> Outcome<Matrix<T>> {
    Matrix::try_from_c64(m).ok_or_else(|| Failure::malformed("complex entries in a real model"))
}

/// `m == c * bond` for a real `c`, if so.
fn multiple_of(m: &Matrix<C>, bond: &Matrix<C>) -> Option<f64> {
    let c = m[(1, 2)] / bond[(1, 2)];
    if c.im != 0.0 {
        return None;
    }
    let diff = m - &bond.scaled_real(c.re);
    (diff.max_abs() <= 1e-14 * (1.0 + c.re.abs())).then_some(c.re)
}

impl Model {
    pub fn load(path: &Path) -> Outcome<Self> {
        Self::from_file(read_json(path)?)
    }

    pub fn from_file(file: ModelFile) -> Outcome<Self> {
        let d = file.d;
        if d < 2 {
            return Err(Failure::malformed(format!(
                "local dimension must be at least 2, got {d}"
            )));
        }
        let n = d
            .checked_mul(d)
            .ok_or_else(|| Failure::malformed("local dimension too large"))?;
        let terms = match (&file.h, &file.blocking) {
            (Some(h), None) => Terms::Single(to_matrix(h, n, "h")?),
            (None, Some(b)) if !b.terms.is_empty() => Terms::Blocked(
                b.terms
                    .iter()
                    .enumerate()
                    .map(|(j, t)| to_matrix(t, n, &format!("blocking term {j}")))
                    .collect::<Outcome<_>>()?,
            ),
            (None, Some(_)) => return Err(Failure::malformed("blocking needs at least one term")),
            _ => return Err(Failure::malformed("a model file needs exactly one of h and blocking")),
        };
        Ok(Self {
            d,
            name: file.name,
            terms,
        })
    }

    pub fn to_file(&self) -> ModelFile {
        let (h, blocking) = match &self.terms {
            Terms::Single(h) => (Some(to_entries(h)), None),
            Terms::Blocked(t) => (
                None,
                Some(Blocking {
                    terms: t.iter().map(to_entries).collect(),
                }),
            ),
        };
        ModelFile {
            d: self.d,
            h,
            name: self.name.clone(),
            blocking,
        }
    }

    pub fn single(d: usize, h: Matrix<C>, name: &str) -> Self {
        Self {
            d,
            name: Some(name.to_string()),
            terms: Terms::Single(h),
        }
    }

    pub fn blocked(d: usize, terms: Vec<Matrix<C>>, name: &str) -> Self {
        Self {
            d,
            name: Some(name.to_string()),
            terms: Terms::Blocked(terms),
        }
    }

    /// XY chain with couplings `1, gamma`; blocked unless `gamma == 1`.
    pub fn xy(gamma: f64, blocked: bool) -> Self {
        let bond = models::xy_bond::<C>();
        if gamma == 1.0 && !blocked {
            Self::single(2, bond, "xy")
        } else {
            let second = bond.scaled_real(gamma);
            Self::blocked(2, vec![bond, second], &format!("xy gamma={gamma}"))
        }
    }

    fn matrices(&self) -> Vec<&Matrix<C>> {
        match &self.terms {
            Terms::Single(h) => vec![h],
            Terms::Blocked(t) => t.iter().collect(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.matrices()
            .iter()
            .all(|m| (0..m.dim()).all(|j| (0..m.dim()).all(|i| m[(i, j)].im == 0.0)))
    }

    /// Local dimension of one site of the chain actually simulated.
    pub fn site_dim(&self) -> usize {
        match &self.terms {
            Terms::Single(_) => self.d,
            Terms::Blocked(t) => self.d.pow(t.len() as u32),
        }
    }

    pub fn chain_as<T: Scalar<Re = f64>>(&self, beta: f64) -> Outcome<ChainModel<T>> {
        let chain = match &self.terms {
            Terms::Single(h) => ChainModel::new(narrow(h)?, self.d, beta)?,
            Terms::Blocked(terms) => {
                let ops = terms
                    .iter()
                    .map(|t| Ok(HermitianOperator::new(narrow(t)?, SiteInterval::new(0, 1)?, self.d)?))
                    .collect::<Outcome<Vec<_>>>()?;
                block_sites(&ops, 2 * terms.len(), beta)?
            }
        };
        Ok(chain)
    }

    pub fn chain(&self, beta: f64) -> Outcome<AnyChain> {
        Ok(if self.is_real() {
            AnyChain::Real(self.chain_as(beta)?)
        } else {
            AnyChain::Complex(self.chain_as(beta)?)
        })
    }

    pub fn family(&self) -> Family {
        let ms = self.matrices();
        if ms.iter().all(|m| m.is_diagonal()) {
            return Family::Classical;
        }
        if self.d != 2 {
            return Family::Other;
        }
        let bond = models::xy_bond::<C>();
        let scales: Option<Vec<f64>> = ms.iter().map(|m| multiple_of(m, &bond)).collect();
        match scales.as_deref() {
            Some(&[s]) => Family::Xy {
                scale: s.abs(),
                gamma: 1.0,
            },
            // a sign flip on every spin past a bond maps the bond to its negative
            Some(&[a, b]) if a != 0.0 => Family::Xy {
                scale: a.abs(),
                gamma: b.abs() / a.abs(),
            },
            Some(&[_, b]) => Family::Xy {
                scale: b.abs(),
                gamma: 0.0,
            },
            _ => Family::Other,
        }
    }

    /// The same XY family member with a different dimerization, always blocked.
    pub fn with_gamma(&self, gamma: f64) -> Outcome<Self> {
        match self.family() {
            Family::Xy { scale, .. } => {
                let mut m = Self::xy(gamma, true);
                if let Terms::Blocked(t) = &mut m.terms {
                    for term in t.iter_mut() {
                        *term = term.scaled_real(scale);
                    }
                }
                Ok(m)
            }
            _ => Err(Failure::malformed("a gamma parameter needs a model from the XY family")),
        }
    }

    /// Exact free energy per site at `beta`, if an oracle covers this model.
    pub fn oracle_free_energy(&self, beta: f64) -> Outcome<f64> {
        match self.family() {
            Family::Classical => {
                let chain = self.chain_as::<C>(beta)?;
                Ok(classical_transfer_free_energy(
                    chain.h().matrix(),
                    chain.local_dim(),
                    beta,
                )?)
            }
            Family::Xy { scale, gamma } => {
                let spins = match &self.terms {
                    Terms::Single(_) => 1.0,
                    Terms::Blocked(t) => t.len() as f64,
                };
                Ok(spins * xy_exact(beta * scale, gamma)? / beta)
            }
            Family::Other => Err(Failure::malformed("no reference oracle is registered for this model")),
        }
    }
}

impl MarginalDump {
    pub fn new<T: Scalar<Re = f64>>(rho: &DensityMatrix<T>, source: String) -> Outcome<Self> {
        Ok(Self {
            d: rho.local_dim(),
            sites: rho.n_sites(),
            rho: to_entries(rho.matrix()),
            eigenvalues: rho.eigenvalues()?,
            source: Some(source),
        })
    }

    pub fn load(path: &Path) -> Outcome<Self> {
        read_json(path)
    }

    pub fn density(&self) -> Outcome<DensityMatrix<C>> {
        let n = self
            .d
            .checked_pow(self.sites as u32)
            .ok_or_else(|| Failure::malformed("marginal dimension too large"))?;
        let m = to_matrix(&self.rho, n, "rho")?;
        Ok(DensityMatrix::new(m, self.d, self.sites)?)
    }
}

pub fn write_json<S: Serialize>(value: &S, path: Option<&Path>) -> Outcome<()> {
    let mut text = serde_json::to_string(value).map_err(|e| Failure::malformed(e.to_string()))?;
    text.push('\n');
    crate::emit(&text, path)
}
