use super::sep::{ProductTerm, SepDecomposition};
use super::{Povm, PovmKind, Witness};
use crate::linalg::{ComplexMatrix, DimVector};

const Q: f64 = 0.25;

/// Rows of the four rank-one projectors `|s_k><s_k| / 4` with sign patterns
/// `s_k` in `{+1, -1}^4`.
const SIGNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

fn sign_projector(s: &[f64; 4]) -> ComplexMatrix {
    let mut v = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            v[i * 4 + j] = s[i] * s[j] * Q;
        }
    }
    ComplexMatrix::from_real(4, 4, &v).expect("4x4")
}

/// Projective POVM on a single 4-dimensional system whose leading 3x3
/// blocks form a POVM that is not projective. All entries are exactly
/// `±1/4`.
pub fn counterexample_c4() -> Povm {
    let dims = DimVector::single(4).expect("valid dims");
    Povm::new(dims, SIGNS.iter().map(sign_projector).collect())
        .expect("4x4 elements")
        .with_kind(PovmKind::Projective)
}

/// The same four matrices on `C^2 ⊗ C^2`, where they are the Hadamard-basis
/// product projectors `|±><±| ⊗ |±><±|`, carried with that decomposition.
pub fn counterexample_c4_product() -> Povm {
    let plus = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).expect("2x2");
    let minus = ComplexMatrix::from_real(2, 2, &[0.5, -0.5, -0.5, 0.5]).expect("2x2");
    let factors = [
        (plus.clone(), plus.clone()),
        (plus.clone(), minus.clone()),
        (minus.clone(), plus),
        (minus.clone(), minus),
    ];
    let witness = SepDecomposition(
        factors
            .iter()
            .map(|(a, b)| vec![ProductTerm(vec![a.clone(), b.clone()])])
            .collect(),
    );
    let dims = DimVector::new(vec![2, 2]).expect("valid dims");
    Povm::new(dims, SIGNS.iter().map(sign_projector).collect())
        .expect("4x4 elements")
        .with_kind(PovmKind::Sep)
        .with_witness(Witness::Sep(witness))
}
