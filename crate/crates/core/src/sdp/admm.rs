use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::cones::{clip, clip_ppt};
use super::{AffineConstraint, Checkpoint, Cone, SdpOptions, SdpProblem, SdpResiduals, SdpSolution, SdpStatus};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::par;

const KEPT_CHECKPOINTS: usize = 20;
const INIT_SCALE: f64 = 1e-3;
const CONSISTENCY_TOL: f64 = 1e-9;
const PINV_CUTOFF: f64 = 1e-12;
/// Below this many matrix entries per iteration the cone projections run
/// sequentially.
const PARALLEL_MIN_WORK: usize = 1024;

/// One real equality `sum Re(conj(coeff) X_block[idx]) = beta`.
struct Row {
    entries: Vec<(usize, usize, Complex64)>,
}

enum GramInverse {
    Diagonal(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

/// The constraint map `A`, its right-hand side, and the inverse of the
/// weighted Gram matrix `sum_b w_b A_b A_b^*`.
struct Affine {
    rows: Vec<Row>,
    beta: Vec<f64>,
    inverse: GramInverse,
}

/// Orthonormal basis of the real space of `n x n` Hermitian matrices as
/// sparse (flat index, entry) lists.
fn hermitian_basis(n: usize) -> Vec<Vec<(usize, Complex64)>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(vec![(i * n + i, Complex64::new(1.0, 0.0))]);
        for j in i + 1..n {
            out.push(vec![
                (i * n + j, Complex64::new(h, 0.0)),
                (j * n + i, Complex64::new(h, 0.0)),
            ]);
            out.push(vec![
                (i * n + j, Complex64::new(0.0, h)),
                (j * n + i, Complex64::new(0.0, -h)),
            ]);
        }
    }
    out
}

/// `Re(conj(e) x)`
fn pair(e: Complex64, x: Complex64) -> f64 {
    e.re * x.re + e.im * x.im
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Affine {
    fn build(p: &SdpProblem, weights: &[f64]) -> Result<Affine> {
        let mut rows = Vec::new();
        let mut beta = Vec::new();
        for con in p.constraints() {
            match con {
                AffineConstraint::BlockSum { blocks, rhs } => {
                    for elem in hermitian_basis(rhs.rows()) {
                        beta.push(elem.iter().map(|&(idx, e)| pair(e, rhs.as_slice()[idx])).sum());
                        let entries = blocks
                            .iter()
                            .flat_map(|&b| elem.iter().map(move |&(idx, e)| (b, idx, e)))
                            .collect();
                        rows.push(Row { entries });
                    }
                }
                AffineConstraint::Scalar { terms, rhs } => {
                    let entries = terms
                        .iter()
                        .flat_map(|t| {
                            t.coeff
                                .as_slice()
                                .iter()
                                .enumerate()
                                .filter(|(_, c)| c.norm_sqr() > 0.0)
                                .map(move |(idx, &c)| (t.block, idx, c))
                        })
                        .collect();
                    rows.push(Row { entries });
                    beta.push(*rhs);
                }
            }
        }
        let gram = gram_matrix(&rows, weights);
        let inverse = pseudo_inverse(&gram)?;
        let affine = Affine { rows, beta, inverse };
        let lambda = affine.solve_gram(&affine.beta);
        let reproduced: Vec<f64> = gram
            .iter()
            .map(|row| row.iter().zip(&lambda).map(|(a, b)| a * b).sum())
            .collect();
        let residual = norm2(
            &reproduced
                .iter()
                .zip(&affine.beta)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        if residual > CONSISTENCY_TOL * norm2(&affine.beta).max(1.0) {
            return Err(Error::InconsistentConstraints(residual));
        }
        Ok(affine)
    }

    fn apply(&self, x: &[ComplexMatrix]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.entries.iter().map(|&(b, idx, e)| pair(e, x[b].as_slice()[idx])).sum())
            .collect()
    }

    /// `x_b += weights[b] * A_b^*(lambda)`
    fn add_adjoint(&self, lambda: &[f64], weights: &[f64], x: &mut [ComplexMatrix]) {
        for (r, &l) in self.rows.iter().zip(lambda) {
            for &(b, idx, e) in &r.entries {
                x[b].as_mut_slice()[idx] += e * (l * weights[b]);
            }
        }
    }

    fn solve_gram(&self, r: &[f64]) -> Vec<f64> {
        match &self.inverse {
            GramInverse::Diagonal(d) => r.iter().zip(d).map(|(a, b)| a * b).collect(),
            GramInverse::Dense(m) => m
                .iter()
                .map(|row| row.iter().zip(r).map(|(a, b)| a * b).sum())
                .collect(),
        }
    }

    fn residual(&self, x: &[ComplexMatrix]) -> f64 {
        let ax = self.apply(x);
        norm2(&ax.iter().zip(&self.beta).map(|(a, b)| a - b).collect::<Vec<_>>())
    }
}

fn gram_matrix(rows: &[Row], weights: &[f64]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut by_slot: BTreeMap<(usize, usize), Vec<(usize, Complex64)>> = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        for &(b, idx, e) in &row.entries {
            by_slot.entry((b, idx)).or_default().push((r, e));
        }
    }
    let mut g = vec![vec![0.0; n]; n];
    for ((b, _), list) in &by_slot {
        for &(r, er) in list {
            for &(s, es) in list {
                g[r][s] += pair(er, es) * weights[*b];
            }
        }
    }
    g
}

fn pseudo_inverse(g: &[Vec<f64>]) -> Result<GramInverse> {
    let n = g.len();
    let diagonal = (0..n).all(|r| (0..n).all(|s| r == s || g[r][s] == 0.0));
    let scale = (0..n).map(|r| g[r][r].abs()).fold(0.0, f64::max);
    let invert = |x: f64| if x > PINV_CUTOFF * scale { 1.0 / x } else { 0.0 };
    if diagonal {
        return Ok(GramInverse::Diagonal((0..n).map(|r| invert(g[r][r])).collect()));
    }
    let flat: Vec<f64> = g.iter().flatten().copied().collect();
    let eig = hermitian_eigen(&ComplexMatrix::from_real(n, n, &flat)?)?;
    let pinv = eig.map_spectrum(invert);
    Ok(GramInverse::Dense(
        (0..n).map(|r| (0..n).map(|s| pinv[(r, s)].re).collect()).collect(),
    ))
}

/// One cone-constrained copy of a block, with its scaled dual variable.
struct Copy {
    block: usize,
    cone: Cone,
    z: ComplexMatrix,
    u: ComplexMatrix,
    /// `||X_b - Z_old||^2`, `||X_b - Z_new||`, `||Z_new - Z_old||^2` from
    /// the latest update.
    step: f64,
    gap: f64,
    moved: f64,
}

impl Copy {
    fn update(&mut self, x: &ComplexMatrix, alpha: f64) {
        let xh = &x.scale(alpha) + &self.z.scale(1.0 - alpha);
        let arg = &xh + &self.u;
        let z_new = match &self.cone {
            Cone::Psd => clip(&arg),
            Cone::Ppt { dims, cut } => clip_ppt(&arg, dims, cut).expect("cone checked at construction"),
        };
        let diff_old = x - &self.z;
        self.step = diff_old.frobenius_norm().powi(2);
        self.moved = (&z_new - &self.z).frobenius_norm().powi(2);
        self.u += &(&xh - &z_new);
        self.z = z_new;
        self.gap = (x - &self.z).frobenius_norm();
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let h = g.hermitian_part();
    let f = h.frobenius_norm();
    if f > 0.0 {
        h.scale(norm / f)
    } else {
        h
    }
}

/// Maximizes the objective of `p` by over-relaxed ADMM.
///
/// The returned blocks satisfy the affine constraints to rounding and lie
/// within `residuals.cone` (Frobenius) of their cones. The status is
/// `Optimal` only when the affine, cone, dual-step, objective-change and
/// gap measures are all at most `opts.tol`.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let positive = |x: f64| x.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater);
    if !positive(opts.tol) || !positive(opts.alpha) || opts.alpha >= 2.0 || opts.check_every == 0 {
        return Err(Error::InvalidArgument(format!(
            "invalid solver options: tol {}, alpha {}, check_every {}",
            opts.tol, opts.alpha, opts.check_every
        )));
    }
    let nb = p.blocks().len();
    let mut multiplicity = vec![0usize; nb];
    for (b, list) in p.cones().iter().enumerate() {
        multiplicity[b] = list.len();
    }
    let weights: Vec<f64> = multiplicity.iter().map(|&m| 1.0 / m as f64).collect();
    let affine = Affine::build(p, &weights)?;

    let obj_norm = p
        .objective()
        .iter()
        .map(|c| c.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt();
    let obj_scale = if obj_norm > 0.0 { obj_norm } else { 1.0 };
    let rho = opts.rho.unwrap_or(obj_scale);
    if !positive(rho) {
        return Err(Error::InvalidArgument(format!("penalty must be positive, got {rho}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut copies: Vec<Copy> = p
        .cones()
        .iter()
        .enumerate()
        .flat_map(|(b, list)| list.iter().map(move |c| (b, c.clone())))
        .map(|(b, cone)| {
            let n = p.blocks()[b];
            Copy {
                block: b,
                cone,
                z: random_hermitian(&mut rng, n, INIT_SCALE),
                u: ComplexMatrix::zeros(n, n),
                step: 0.0,
                gap: 0.0,
                moved: 0.0,
            }
        })
        .collect();
    let work: usize = copies.iter().map(|c| c.z.rows() * c.z.rows()).sum();
    // C_b / (rho m_b)
    let drift: Vec<ComplexMatrix> = p
        .objective()
        .iter()
        .zip(&weights)
        .map(|(c, w)| c.scale(w / rho))
        .collect();

    let mut x: Vec<ComplexMatrix> = p.blocks().iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
    let mut lambda = vec![0.0; affine.rows.len()];
    let mut checkpoints: VecDeque<Checkpoint> = VecDeque::with_capacity(KEPT_CHECKPOINTS);
    let mut last_objective = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    let mut cone_residual = f64::INFINITY;
    let mut gap = f64::INFINITY;

    for k in 1..=opts.max_iter {
        iterations = k;
        // affine step: X_b = V_b + w_b A_b^* lambda with A(X) = beta
        for (b, xb) in x.iter_mut().enumerate() {
            *xb = drift[b].clone();
        }
        for c in &copies {
            let v = &c.z - &c.u;
            x[c.block] += &v.scale(weights[c.block]);
        }
        if !affine.rows.is_empty() {
            let ax = affine.apply(&x);
            let r: Vec<f64> = affine.beta.iter().zip(&ax).map(|(b, a)| b - a).collect();
            lambda = affine.solve_gram(&r);
            affine.add_adjoint(&lambda, &weights, &mut x);
        }

        // cone steps, one per copy
        if work >= PARALLEL_MIN_WORK && par::is_parallel() {
            let xs = &x;
            par::for_each_mut(&mut copies, |_, c| c.update(&xs[c.block], opts.alpha));
        } else {
            for c in copies.iter_mut() {
                c.update(&x[c.block], opts.alpha);
            }
        }

        if k % opts.check_every != 0 && k != opts.max_iter {
            continue;
        }
        let fixed_point = opts.alpha * copies.iter().map(|c| c.step).sum::<f64>().sqrt();
        let dual_step = copies.iter().map(|c| c.moved).sum::<f64>().sqrt();
        cone_residual = copies.iter().map(|c| c.gap).fold(0.0, f64::max);
        let objective = p.evaluate(&x);
        let dual_estimate = -rho * lambda.iter().zip(&affine.beta).map(|(l, b)| l * b).sum::<f64>();
        gap = (objective - dual_estimate).abs();
        let affine_residual = affine.residual(&x);
        let change = (objective - last_objective).abs();
        last_objective = objective;

        if checkpoints.len() == KEPT_CHECKPOINTS {
            checkpoints.pop_front();
        }
        checkpoints.push_back(Checkpoint {
            iteration: k,
            fixed_point,
            cone: cone_residual,
            objective,
        });

        let tol = opts.tol;
        if affine_residual <= tol
            && cone_residual <= tol
            && dual_step <= tol
            && change <= tol * obj_scale
            && gap <= tol * obj_scale
        {
            converged = true;
            break;
        }
    }

    let status = if converged {
        SdpStatus::Optimal
    } else if cone_residual > 1e3 * opts.tol {
        SdpStatus::InfeasibleEvidence
    } else {
        SdpStatus::MaxIterations
    };
    for xb in x.iter_mut() {
        *xb = xb.hermitian_part();
    }
    Ok(SdpSolution {
        objective: p.evaluate(&x),
        residuals: SdpResiduals {
            affine: affine.residual(&x),
            cone: cone_residual,
            gap,
        },
        blocks: x,
        status,
        iterations,
        checkpoints: checkpoints.into_iter().collect(),
    })
}
