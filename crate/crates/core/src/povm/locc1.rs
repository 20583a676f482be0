//! One-round LOCC measurements as trees of conditional local POVMs.
//!
//! Parties measure in the order stored on the tree. The node at depth `s`
//! belongs to party `order[s]` and holds that party's POVM conditioned on the
//! outcomes published before it. A root-to-leaf path selects one local
//! element per party; their tensor product (in party-index order) is one
//! element of the effective POVM.

use serde::{Deserialize, Serialize};

use super::sep::{ProductTerm, SepDecomposition};
use super::{Povm, PovmKind, Witness};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, restrict_matrix, sum_matrices, tensor_all, ComplexMatrix, DimVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Locc1Outcome {
    pub element: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Box<Locc1Node>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Locc1Node {
    pub party: usize,
    pub outcomes: Vec<Locc1Outcome>,
}

impl Locc1Node {
    /// A node measuring `elements`, each outcome followed by `children(j)`.
    pub fn new(
        party: usize,
        elements: Vec<ComplexMatrix>,
        mut children: impl FnMut(usize) -> Option<Locc1Node>,
    ) -> Self {
        let outcomes = elements
            .into_iter()
            .enumerate()
            .map(|(j, element)| Locc1Outcome {
                element,
                children: children(j).map(Box::new),
            })
            .collect();
        Self { party, outcomes }
    }

    pub fn leaf(party: usize, elements: Vec<ComplexMatrix>) -> Self {
        Self::new(party, elements, |_| None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct Locc1Tree {
    dims: DimVector,
    order: Vec<usize>,
    root: Locc1Node,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRepr {
    dims: DimVector,
    order: Vec<usize>,
    root: Locc1Node,
}

impl TryFrom<TreeRepr> for Locc1Tree {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        Locc1Tree::new(r.dims, r.order, r.root)
    }
}

impl From<Locc1Tree> for TreeRepr {
    fn from(t: Locc1Tree) -> Self {
        TreeRepr {
            dims: t.dims,
            order: t.order,
            root: t.root,
        }
    }
}

impl Locc1Tree {
    /// Checks the tree shape: `order` is a permutation, node parties follow
    /// it, local elements have the right side, and exactly the last level
    /// has no children. Positivity and completeness are checked by
    /// [`Locc1Tree::validate`].
    pub fn new(dims: DimVector, order: Vec<usize>, root: Locc1Node) -> Result<Self> {
        let k = dims.parties();
        let mut seen = vec![false; k];
        if order.len() != k {
            return Err(Error::InvalidTree(format!(
                "order {order:?} is not a permutation of {k} parties"
            )));
        }
        for &p in &order {
            if p >= k || seen[p] {
                return Err(Error::InvalidTree(format!(
                    "order {order:?} is not a permutation of {k} parties"
                )));
            }
            seen[p] = true;
        }
        check_shape(&root, 0, &dims, &order)?;
        Ok(Self { dims, order, root })
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn root(&self) -> &Locc1Node {
        &self.root
    }

    /// Every conditional family must be a complete local POVM within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        validate_node(&self.root, &self.dims, tol, &mut Vec::new())
    }

    /// Local factors (party order) of every leaf, in depth-first order.
    pub fn leaf_factors(&self) -> Vec<Vec<ComplexMatrix>> {
        let mut out = Vec::new();
        let mut path: Vec<Option<ComplexMatrix>> = vec![None; self.dims.parties()];
        collect_leaves(&self.root, &mut path, &mut out);
        out
    }

    pub fn leaf_count(&self) -> usize {
        count_leaves(&self.root)
    }

    pub fn sep_decomposition(&self) -> SepDecomposition {
        SepDecomposition(
            self.leaf_factors()
                .into_iter()
                .map(|factors| vec![ProductTerm(factors)])
                .collect(),
        )
    }

    /// Restricts every conditional local element to the party's
    /// sub-dimension.
    pub fn restrict(&self, sub_dims: &DimVector) -> Result<Locc1Tree> {
        sub_dims.padding_to(&self.dims)?;
        let root = restrict_node(&self.root, &self.dims, sub_dims)?;
        Locc1Tree::new(sub_dims.clone(), self.order.clone(), root)
    }
}

fn check_shape(node: &Locc1Node, depth: usize, dims: &DimVector, order: &[usize]) -> Result<()> {
    if node.party != order[depth] {
        return Err(Error::InvalidTree(format!(
            "node at depth {depth} belongs to party {} but the order expects {}",
            node.party, order[depth]
        )));
    }
    if node.outcomes.is_empty() {
        return Err(Error::InvalidTree(format!("party {} has no outcomes", node.party)));
    }
    let d = dims.local(node.party);
    let last = depth + 1 == order.len();
    for (j, o) in node.outcomes.iter().enumerate() {
        if !o.element.is_square() || o.element.rows() != d {
            return Err(Error::InvalidTree(format!(
                "party {} outcome {j}: {}x{} element, expected side {d}",
                node.party,
                o.element.rows(),
                o.element.cols()
            )));
        }
        match (&o.children, last) {
            (Some(_), true) => {
                return Err(Error::InvalidTree(format!(
                    "party {} is last in the order but outcome {j} has children",
                    node.party
                )))
            }
            (None, false) => {
                return Err(Error::InvalidTree(format!(
                    "party {} outcome {j} has no follow-up measurement",
                    node.party
                )))
            }
            (Some(child), false) => check_shape(child, depth + 1, dims, order)?,
            (None, true) => {}
        }
    }
    Ok(())
}

fn validate_node(node: &Locc1Node, dims: &DimVector, tol: f64, prefix: &mut Vec<usize>) -> Result<()> {
    let d = dims.local(node.party);
    let sum = sum_matrices(node.outcomes.iter().map(|o| &o.element)).expect("non-empty");
    let residual = sum.max_abs_diff(&ComplexMatrix::identity(d));
    if residual > tol {
        return Err(Error::InvalidTree(format!(
            "conditional POVM of party {} after outcomes {prefix:?} is incomplete (residual {residual:.3e})",
            node.party
        )));
    }
    for (j, o) in node.outcomes.iter().enumerate() {
        let dev = o.element.hermitian_deviation();
        if dev > tol {
            return Err(Error::InvalidTree(format!(
                "party {} element {j} after outcomes {prefix:?} is not Hermitian ({dev:.3e})",
                node.party
            )));
        }
        let min = min_eigenvalue(&o.element.hermitian_part())?;
        if min < -tol {
            return Err(Error::InvalidTree(format!(
                "party {} element {j} after outcomes {prefix:?} has eigenvalue {min:.3e}",
                node.party
            )));
        }
        if let Some(child) = &o.children {
            prefix.push(j);
            validate_node(child, dims, tol, prefix)?;
            prefix.pop();
        }
    }
    Ok(())
}

fn collect_leaves(node: &Locc1Node, path: &mut Vec<Option<ComplexMatrix>>, out: &mut Vec<Vec<ComplexMatrix>>) {
    for o in &node.outcomes {
        path[node.party] = Some(o.element.clone());
        match &o.children {
            Some(child) => collect_leaves(child, path, out),
            None => out.push(
                path.iter()
                    .map(|f| f.clone().expect("every party on the path"))
                    .collect(),
            ),
        }
    }
    path[node.party] = None;
}

fn count_leaves(node: &Locc1Node) -> usize {
    node.outcomes
        .iter()
        .map(|o| o.children.as_ref().map_or(1, |c| count_leaves(c)))
        .sum()
}

fn restrict_node(node: &Locc1Node, dims: &DimVector, sub_dims: &DimVector) -> Result<Locc1Node> {
    let from = DimVector::single(dims.local(node.party))?;
    let to = DimVector::single(sub_dims.local(node.party))?;
    let outcomes = node
        .outcomes
        .iter()
        .map(|o| {
            Ok(Locc1Outcome {
                element: restrict_matrix(&o.element, &from, &to)?,
                children: match &o.children {
                    Some(c) => Some(Box::new(restrict_node(c, dims, sub_dims)?)),
                    None => None,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Locc1Node {
        party: node.party,
        outcomes,
    })
}

/// Effective POVM of a tree, checking completeness of every conditional
/// family at `tol`. The tree itself is kept as the witness; its induced
/// single-term separable decomposition is available through
/// [`Povm::sep_decomposition`].
pub fn flatten_locc1_with_tol(tree: &Locc1Tree, tol: f64) -> Result<Povm> {
    tree.validate(tol)?;
    let elements = tree
        .leaf_factors()
        .iter()
        .map(|f| tensor_all(f).expect("at least one party"))
        .collect();
    Ok(Povm::new(tree.dims.clone(), elements)?
        .with_kind(PovmKind::Locc1)
        .with_witness(Witness::Locc1(tree.clone())))
}

pub fn flatten_locc1(tree: &Locc1Tree) -> Result<Povm> {
    flatten_locc1_with_tol(tree, super::DEFAULT_TOL)
}

pub fn restrict_locc1(tree: &Locc1Tree, sub_dims: &DimVector) -> Result<Locc1Tree> {
    tree.restrict(sub_dims)
}
