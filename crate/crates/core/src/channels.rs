//! Kraus decompositions of the single-wire error channels and their diagnostics.
//!
//! Qutrit matrices are written in the `{|W>, |0>, |1>}` basis, which coincides with the
//! encoded value order. Qubit matrices use `{|0>, |1>}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::state::{LocalImage, SparseState};

const ZERO_TOL: f64 = 1e-14;
const FLAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Depolarizing,
    BitFlip,
    Dephasing,
    Damping,
    Heating,
    /// Hand-supplied Kraus list (tests and diagnostics).
    Custom,
}

impl ChannelKind {
    pub const STANDARD: [ChannelKind; 5] = [
        ChannelKind::Depolarizing,
        ChannelKind::BitFlip,
        ChannelKind::Dephasing,
        ChannelKind::Damping,
        ChannelKind::Heating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Damping => "damping",
            ChannelKind::Heating => "heating",
            ChannelKind::Custom => "custom",
        }
    }
}

/// Serializable description of a standard channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub dim: u8,
    pub epsilon: f64,
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        make_channel(self.kind, self.dim, self.epsilon)
    }
}

/// A basis-preserving description of a Kraus list, precomputed for the sampler.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub kind: ChannelKind,
    pub dim: u8,
    pub epsilon: f64,
    pub kraus: Vec<DMatrix<Complex64>>,
    pub basis_preserving: bool,
    pub mixed_unitary: bool,
    pub diagonal_weights: bool,
    /// `1 - <ref|K0^dag K0|ref>` with `ref` the wait state (qutrit) or |0> (qubit).
    pub epsilon_w: f64,
    /// Column images of each operator (only meaningful when basis preserving).
    monomials: Vec<Vec<LocalImage>>,
    /// `weights[m][v] = (K_m^dag K_m)_{vv}`.
    weights: Vec<[f64; 3]>,
}

/// Diagnostics reported by [`verify_channel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub kind: ChannelKind,
    pub dim: u8,
    pub epsilon: f64,
    pub kraus_count: usize,
    pub completeness_residual: f64,
    pub basis_preserving: bool,
    pub mixed_unitary: bool,
    pub diagonal_weights: bool,
    pub epsilon_w: f64,
    /// Whether the trajectory sampler accepts the channel.
    pub sampler_supported: bool,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn outer(d: usize, row: usize, col: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(d, d);
    m[(row, col)] = c(1.0);
    m
}

fn scaled(m: DMatrix<Complex64>, s: f64) -> DMatrix<Complex64> {
    m * c(s)
}

/// Cyclic shift `A1` (sends |0> to |W>, |1> to |0>, |W> to |1>).
fn qutrit_shift() -> DMatrix<Complex64> {
    outer(3, 0, 1) + outer(3, 1, 2) + outer(3, 2, 0)
}

/// Clock `A2 = diag(1, w, w^2)`, `w = exp(2 pi i / 3)`.
fn qutrit_clock() -> DMatrix<Complex64> {
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), w, w * w]))
}

/// `X-tilde = |W><W| + |0><1| + |1><0|`.
fn qutrit_xtilde() -> DMatrix<Complex64> {
    outer(3, 0, 0) + outer(3, 1, 2) + outer(3, 2, 1)
}

fn pauli(which: char) -> DMatrix<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    match which {
        'X' => DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        'Y' => DMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]),
        'Z' => DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
        _ => DMatrix::identity(2, 2),
    }
}

/// Builds one of the standard channels.
///
/// The qutrit bit flip uses `sqrt(eps) X-tilde` as its error operator: X-tilde exchanges
/// |0> and |1> and acts as the identity on |W>, which keeps the channel trace preserving
/// and mixed unitary.
pub fn make_channel(kind: ChannelKind, dim: u8, epsilon: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&epsilon) || epsilon.is_nan() {
        return Err(SimError::InvalidParameter(format!("epsilon must lie in [0, 1], got {epsilon}")));
    }
    let e = epsilon;
    let keep = (1.0 - e).sqrt();
    let kraus: Vec<DMatrix<Complex64>> = match (kind, dim) {
        (ChannelKind::Depolarizing, 2) => {
            let mut k = vec![scaled(DMatrix::identity(2, 2), keep)];
            k.extend(['X', 'Y', 'Z'].map(|p| scaled(pauli(p), (e / 3.0).sqrt())));
            k
        }
        (ChannelKind::BitFlip, 2) => vec![scaled(DMatrix::identity(2, 2), keep), scaled(pauli('X'), e.sqrt())],
        (ChannelKind::Dephasing, 2) => vec![scaled(DMatrix::identity(2, 2), keep), scaled(pauli('Z'), e.sqrt())],
        (ChannelKind::Damping, 2) => vec![
            outer(2, 0, 0) + scaled(outer(2, 1, 1), keep),
            scaled(outer(2, 0, 1), e.sqrt()),
        ],
        (ChannelKind::Heating, 2) => vec![
            outer(2, 1, 1) + scaled(outer(2, 0, 0), keep),
            scaled(outer(2, 1, 0), e.sqrt()),
        ],
        (ChannelKind::Depolarizing, 3) => {
            let a1 = qutrit_shift();
            let a2 = qutrit_clock();
            let a1s = &a1 * &a1;
            let a2s = &a2 * &a2;
            let ops = [
                a1.clone(),
                a2.clone(),
                a1s.clone(),
                a2s.clone(),
                &a1 * &a2,
                &a1s * &a2,
                &a1 * &a2s,
                &a1s * &a2s,
            ];
            let mut k = vec![scaled(DMatrix::identity(3, 3), keep)];
            k.extend(ops.into_iter().map(|m| scaled(m, (e / 8.0).sqrt())));
            k
        }
        (ChannelKind::BitFlip, 3) => vec![scaled(DMatrix::identity(3, 3), keep), scaled(qutrit_xtilde(), e.sqrt())],
        (ChannelKind::Dephasing, 3) => {
            let a2 = qutrit_clock();
            let a2s = &a2 * &a2;
            vec![
                scaled(DMatrix::identity(3, 3), keep),
                scaled(a2, (e / 2.0).sqrt()),
                scaled(a2s, (e / 2.0).sqrt()),
            ]
        }
        (ChannelKind::Damping, 3) => vec![
            outer(3, 0, 0) + scaled(outer(3, 1, 1) + outer(3, 2, 2), keep),
            scaled(outer(3, 0, 1), e.sqrt()),
            scaled(outer(3, 0, 2), e.sqrt()),
        ],
        (ChannelKind::Heating, 3) => vec![
            outer(3, 1, 1) + outer(3, 2, 2) + scaled(outer(3, 0, 0), keep),
            scaled(outer(3, 1, 0), (e / 2.0).sqrt()),
            scaled(outer(3, 2, 0), (e / 2.0).sqrt()),
        ],
        _ => {
            return Err(SimError::UnsupportedChannel(format!("{} on dimension {dim}", kind.name())));
        }
    };
    KrausChannel::from_parts(kind, dim, epsilon, kraus)
}

impl KrausChannel {
    /// Wraps an arbitrary Kraus list; no completeness check is enforced here.
    pub fn custom(dim: u8, epsilon: f64, kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        Self::from_parts(ChannelKind::Custom, dim, epsilon, kraus)
    }

    fn from_parts(kind: ChannelKind, dim: u8, epsilon: f64, kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let d = dim as usize;
        if !(dim == 2 || dim == 3) {
            return Err(SimError::InvalidParameter(format!("channel dimension must be 2 or 3, got {dim}")));
        }
        if kraus.is_empty() || kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
            return Err(SimError::InvalidParameter(format!("Kraus operators must be a non-empty list of {d}x{d} matrices")));
        }
        let products: Vec<DMatrix<Complex64>> = kraus.iter().map(|k| k.adjoint() * k).collect();
        let basis_preserving = kraus
            .iter()
            .all(|k| (0..d).all(|col| (0..d).filter(|&r| k[(r, col)].norm() > ZERO_TOL).count() <= 1));
        let off_diag_max = |m: &DMatrix<Complex64>| {
            let mut x: f64 = 0.0;
            for r in 0..d {
                for cc in 0..d {
                    if r != cc {
                        x = x.max(m[(r, cc)].norm());
                    }
                }
            }
            x
        };
        let prop_identity = |m: &DMatrix<Complex64>| {
            off_diag_max(m) <= FLAG_TOL && (1..d).all(|i| (m[(i, i)] - m[(0, 0)]).norm() <= FLAG_TOL)
        };
        let diagonal_weights = products.iter().all(|p| off_diag_max(p) <= FLAG_TOL);
        let mixed_unitary = prop_identity(&kraus[0]) && products[1..].iter().all(prop_identity);
        let epsilon_w = 1.0 - products[0][(0, 0)].re;
        let monomials = kraus
            .iter()
            .map(|k| {
                (0..d)
                    .map(|col| {
                        (0..d)
                            .find(|&r| k[(r, col)].norm() > ZERO_TOL)
                            .map(|r| (r as u8, k[(r, col)]))
                    })
                    .collect()
            })
            .collect();
        let weights = products
            .iter()
            .map(|p| {
                let mut w = [0.0; 3];
                for (v, slot) in w.iter_mut().enumerate().take(d) {
                    *slot = p[(v, v)].re;
                }
                w
            })
            .collect();
        Ok(KrausChannel {
            kind,
            dim,
            epsilon,
            kraus,
            basis_preserving,
            mixed_unitary,
            diagonal_weights,
            epsilon_w,
            monomials,
            weights,
        })
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    /// Largest entry of `sum_m K_m^dag K_m - I` in modulus.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim as usize;
        let mut sum = DMatrix::<Complex64>::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        sum -= DMatrix::identity(d, d);
        sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Column images of `K_m`.
    pub fn monomial(&self, m: usize) -> &[LocalImage] {
        &self.monomials[m]
    }

    /// `(K_m^dag K_m)_{vv}`.
    pub fn weight(&self, m: usize, v: usize) -> f64 {
        self.weights[m][v]
    }

    /// Smallest no-error weight over local values.
    pub fn min_no_error_weight(&self) -> f64 {
        self.weights[0][..self.dim as usize].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `K_0` is a multiple of the identity, so it never changes a state after normalization.
    pub fn k0_is_scalar(&self) -> bool {
        let k = &self.kraus[0];
        let d = self.dim as usize;
        (0..d).all(|r| (0..d).all(|cc| if r == cc { (k[(r, r)] - k[(0, 0)]).norm() <= FLAG_TOL } else { k[(r, cc)].norm() <= FLAG_TOL }))
    }

    /// Diagonal of `K_0` when `K_0` is diagonal.
    pub fn k0_diagonal(&self) -> Option<Vec<Complex64>> {
        let k = &self.kraus[0];
        let d = self.dim as usize;
        let diag = (0..d).all(|r| (0..d).all(|cc| r == cc || k[(r, cc)].norm() <= FLAG_TOL));
        diag.then(|| (0..d).map(|v| k[(v, v)]).collect())
    }

    /// Fails unless the trajectory sampler can handle this channel.
    pub fn ensure_samplable(&self) -> Result<()> {
        if !self.basis_preserving {
            return Err(SimError::UnsupportedChannel("Kraus operators do not map basis states to basis states".into()));
        }
        if !self.diagonal_weights {
            return Err(SimError::NonDiagonalWeights);
        }
        Ok(())
    }
}

/// Completeness residual, structural flags and `epsilon_w`.
pub fn verify_channel(ch: &KrausChannel) -> ChannelReport {
    ChannelReport {
        kind: ch.kind,
        dim: ch.dim,
        epsilon: ch.epsilon,
        kraus_count: ch.kraus.len(),
        completeness_residual: ch.completeness_residual(),
        basis_preserving: ch.basis_preserving,
        mixed_unitary: ch.mixed_unitary,
        diagonal_weights: ch.diagonal_weights,
        epsilon_w: ch.epsilon_w,
        sampler_supported: ch.basis_preserving && ch.diagonal_weights,
    }
}

/// Applies `K_m / sqrt(<K_m^dag K_m>)` to `wire`.
pub fn inject_error(state: &SparseState, wire: usize, kraus_index: usize, ch: &KrausChannel) -> Result<SparseState> {
    state.layout().check_wire(wire)?;
    if kraus_index >= ch.kraus_count() {
        return Err(SimError::InvalidParameter(format!(
            "Kraus index {kraus_index} out of range for {} operators",
            ch.kraus_count()
        )));
    }
    if state.layout().dim(wire) != ch.dim {
        return Err(SimError::LayoutMismatch(format!("channel of dimension {} on wire of dimension {}", ch.dim, state.layout().dim(wire))));
    }
    if !ch.basis_preserving {
        return Err(SimError::UnsupportedChannel("error injection needs a basis-preserving channel".into()));
    }
    let mut out = state.clone();
    out.apply_local(wire, ch.monomial(kraus_index));
    if out.is_empty() {
        return Err(SimError::ZeroNorm);
    }
    out.normalize()?;
    Ok(out)
}
