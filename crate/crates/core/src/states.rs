//! Density matrices and the state families used throughout the toolkit:
//! (generalized) Bell states, the nine Domino states, and the Domino basis
//! completed with computational product states in a larger `m x n` system.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::{ONE, ZERO};
use crate::linalg::ops::{bipartite_reshape, embed_matrix, embed_vector, tensor_vec};
use crate::linalg::{hermitian_eigen, singular_values, ComplexMatrix, DimVector};

pub const STATE_TOL: f64 = 1e-9;
const STATE_HERMITIAN_TOL: f64 = 1e-10;
/// Singular values above this count toward the Schmidt rank.
pub const SCHMIDT_TOL: f64 = 1e-9;

/// A unit-trace positive semidefinite operator on `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    rho: ComplexMatrix,
    dims: DimVector,
    label: String,
}

impl State {
    pub fn new(rho: ComplexMatrix, dims: DimVector, label: impl Into<String>) -> Result<Self> {
        if !rho.is_square() || rho.rows() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} density matrix for dims {dims}",
                rho.rows(),
                rho.cols()
            )));
        }
        let deviation = rho.hermitian_deviation();
        if deviation > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigen(&rho)?.min();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            rho,
            dims,
            label: label.into(),
        })
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Amplitude vector of a rank-one state (up to a global phase).
    pub fn amplitudes(&self) -> Result<Vec<Complex64>> {
        let eig = hermitian_eigen(&self.rho)?;
        let n = eig.values.len();
        let second = if n >= 2 { eig.values[n - 2] } else { 0.0 };
        if second.abs() > STATE_TOL {
            return Err(Error::MixedState(second));
        }
        let top = eig.values[n - 1].max(0.0).sqrt();
        let mut v = eig.vectors.column(n - 1);
        // fix the phase so the largest amplitude is real and positive
        if let Some(big) = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
            let phase = big.conj() / big.norm();
            for z in v.iter_mut() {
                *z *= phase * top;
            }
        }
        Ok(v)
    }

    /// Schmidt rank of a pure state across the cut `side_a | rest`.
    pub fn schmidt_rank(&self, side_a: &[usize]) -> Result<usize> {
        let psi = self.amplitudes()?;
        let m = bipartite_reshape(&psi, &self.dims, side_a)?;
        Ok(singular_values(&m).into_iter().filter(|&s| s > SCHMIDT_TOL).count())
    }

    /// The state viewed in a system padded to `new_dims`.
    pub fn embed(&self, new_dims: &DimVector) -> Result<State> {
        let rho = embed_matrix(&self.rho, &self.dims, new_dims)?;
        Ok(State {
            rho,
            dims: new_dims.clone(),
            label: self.label.clone(),
        })
    }

    /// `p * self + (1 - p) * other`.
    pub fn mix(&self, other: &State, p: f64) -> Result<State> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("mixing states of different dims".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0,1]")));
        }
        let rho = &self.rho.scale(p) + &other.rho.scale(1.0 - p);
        State::new(rho, self.dims.clone(), format!("mix({},{})", self.label, other.label))
    }
}

/// Normalizes `amplitudes` and returns the projector onto it.
pub fn pure_state(amplitudes: &[Complex64], dims: &DimVector) -> Result<State> {
    pure_state_labeled(amplitudes, dims, "psi")
}

pub fn pure_state_labeled(amplitudes: &[Complex64], dims: &DimVector, label: &str) -> Result<State> {
    if amplitudes.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "{} amplitudes for dims {dims}",
            amplitudes.len()
        )));
    }
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidState("zero amplitude vector".into()));
    }
    let psi: Vec<Complex64> = amplitudes.iter().map(|z| z / norm).collect();
    State::new(ComplexMatrix::outer(&psi, &psi), dims.clone(), label)
}

/// A finite list of states on a common system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateSetRepr", into = "StateSetRepr")]
pub struct StateSet {
    dims: DimVector,
    states: Vec<State>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateSetRepr {
    dims: DimVector,
    states: Vec<LabeledMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabeledMatrix {
    label: String,
    matrix: ComplexMatrix,
}

impl TryFrom<StateSetRepr> for StateSet {
    type Error = Error;

    fn try_from(r: StateSetRepr) -> Result<Self> {
        let states = r
            .states
            .into_iter()
            .map(|s| State::new(s.matrix, r.dims.clone(), s.label))
            .collect::<Result<Vec<_>>>()?;
        StateSet::new(states)
    }
}

impl From<StateSet> for StateSetRepr {
    fn from(s: StateSet) -> Self {
        StateSetRepr {
            dims: s.dims,
            states: s
                .states
                .into_iter()
                .map(|st| LabeledMatrix {
                    label: st.label,
                    matrix: st.rho,
                })
                .collect(),
        }
    }
}

impl StateSet {
    pub fn new(states: Vec<State>) -> Result<Self> {
        let dims = states
            .first()
            .ok_or_else(|| Error::InvalidState("empty state set".into()))?
            .dims
            .clone();
        if let Some(bad) = states.iter().find(|s| s.dims != dims) {
            return Err(Error::DimensionMismatch(format!(
                "state {:?} has dims {} but the set uses {dims}",
                bad.label, bad.dims
            )));
        }
        Ok(Self { dims, states })
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn iter(&self) -> std::slice::Iter<'_, State> {
        self.states.iter()
    }

    pub fn get(&self, i: usize) -> Option<&State> {
        self.states.get(i)
    }

    /// First `n` states (all of them if `n >= len`).
    pub fn take(&self, n: usize) -> Result<StateSet> {
        StateSet::new(self.states.iter().take(n).cloned().collect())
    }

    pub fn select(&self, indices: &[usize]) -> Result<StateSet> {
        let states = indices
            .iter()
            .map(|&i| {
                self.states
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("state index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        StateSet::new(states)
    }

    pub fn embed(&self, new_dims: &DimVector) -> Result<StateSet> {
        StateSet::new(
            self.states
                .iter()
                .map(|s| s.embed(new_dims))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Overlap table `tr(rho_i rho_j)`.
    pub fn overlaps(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .map(|a| self.states.iter().map(|b| a.rho.trace_product(&b.rho).re).collect())
            .collect()
    }

    /// `tr(rho_i rho_j) <= tol` for all `i != j`. For positive operators this
    /// vanishes exactly when the supports are orthogonal.
    pub fn mutually_orthogonal(&self, tol: f64) -> bool {
        let n = self.states.len();
        (0..n).all(|i| ((i + 1)..n).all(|j| self.states[i].rho.trace_product(&self.states[j].rho).re <= tol))
    }
}

fn basis(d: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; d];
    v[k] = ONE;
    v
}

/// `(|a> + sign |b>) / sqrt 2` in dimension 3.
fn superpose(a: usize, b: usize, sign: f64) -> Vec<Complex64> {
    let mut v = vec![ZERO; 3];
    v[a] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v[b] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
    v
}

/// The `d^2` maximally entangled states
/// `|Phi_{a,b}> = d^{-1/2} sum_k w^{a k} |k>|k+b mod d>`, `w = exp(2 pi i / d)`,
/// ordered with `a` slowest. Element `(0,0)` is `|Phi+>`.
pub fn generalized_bell_vectors(d: usize) -> Result<Vec<(String, Vec<Complex64>)>> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "generalized Bell states need d >= 2, got {d}"
        )));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut v = vec![ZERO; d * d];
            for k in 0..d {
                let phase = Complex64::from_polar(amp, 2.0 * PI * ((a * k) % d) as f64 / d as f64);
                v[k * d + (k + b) % d] = phase;
            }
            out.push((format!("Phi({a},{b})"), v));
        }
    }
    Ok(out)
}

pub fn generalized_bell_states(d: usize) -> Result<StateSet> {
    let dims = DimVector::new(vec![d, d])?;
    let states = generalized_bell_vectors(d)?
        .into_iter()
        .map(|(label, v)| pure_state_labeled(&v, &dims, &label))
        .collect::<Result<Vec<_>>>()?;
    StateSet::new(states)
}

/// The four two-qubit Bell states in the order `Phi+, Psi+, Phi-, Psi-`.
pub fn bell_states() -> StateSet {
    let labels = ["Phi+", "Psi+", "Phi-", "Psi-"];
    let set = generalized_bell_states(2).expect("d = 2 is valid");
    StateSet::new(
        set.states
            .into_iter()
            .zip(labels)
            .map(|(s, l)| s.with_label(l))
            .collect(),
    )
    .expect("common dims")
}

/// Local factors of the nine Domino product states on `3 x 3`.
pub fn domino_factors() -> Vec<(String, Vec<Complex64>, Vec<Complex64>)> {
    let mut out = Vec::with_capacity(9);
    for (sign, s) in [(1.0, "+"), (-1.0, "-")] {
        out.push((format!("|0>|0{s}1>"), basis(3, 0), superpose(0, 1, sign)));
    }
    for (sign, s) in [(1.0, "+"), (-1.0, "-")] {
        out.push((format!("|0{s}1>|2>"), superpose(0, 1, sign), basis(3, 2)));
    }
    for (sign, s) in [(1.0, "+"), (-1.0, "-")] {
        out.push((format!("|2>|1{s}2>"), basis(3, 2), superpose(1, 2, sign)));
    }
    for (sign, s) in [(1.0, "+"), (-1.0, "-")] {
        out.push((format!("|1{s}2>|0>"), superpose(1, 2, sign), basis(3, 0)));
    }
    out.push(("|1>|1>".into(), basis(3, 1), basis(3, 1)));
    out
}

pub fn domino_vectors() -> Vec<(String, Vec<Complex64>)> {
    domino_factors()
        .into_iter()
        .map(|(label, a, b)| (label, tensor_vec(&a, &b)))
        .collect()
}

pub fn domino_states() -> StateSet {
    let dims = DimVector::new(vec![3, 3]).expect("valid dims");
    StateSet::new(
        domino_vectors()
            .into_iter()
            .map(|(label, v)| pure_state_labeled(&v, &dims, &label).expect("normalized product state"))
            .collect(),
    )
    .expect("common dims")
}

/// Amplitude vectors of the Domino states embedded in `m x n`, followed by
/// every computational product state `|i>|j>` with `i >= 3` or `j >= 3`.
pub fn extended_domino_vectors(m: usize, n: usize) -> Result<Vec<(String, Vec<Complex64>)>> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidArgument(format!(
            "extended Domino basis needs m, n >= 3, got ({m},{n})"
        )));
    }
    let small = DimVector::new(vec![3, 3])?;
    let big = DimVector::new(vec![m, n])?;
    let mut out = domino_vectors()
        .into_iter()
        .map(|(label, v)| Ok((label, embed_vector(&v, &small, &big)?)))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..m {
        for j in 0..n {
            if i >= 3 || j >= 3 {
                out.push((format!("|{i}>|{j}>"), tensor_vec(&basis(m, i), &basis(n, j))));
            }
        }
    }
    Ok(out)
}

pub fn extended_domino_basis(m: usize, n: usize) -> Result<StateSet> {
    let dims = DimVector::new(vec![m, n])?;
    StateSet::new(
        extended_domino_vectors(m, n)?
            .into_iter()
            .map(|(label, v)| pure_state_labeled(&v, &dims, &label))
            .collect::<Result<Vec<_>>>()?,
    )
}
