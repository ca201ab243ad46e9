//! Small vertex patterns that cover connected sets of non-isolated zeros, and
//! the subset sums attached to them at the wetting threshold.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{critical_h, Parameters};
use crate::numeric::NeumaierSum;

/// A pattern: lattice points of `Z^2` plus the pattern edges between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternGraph {
    id: u8,
    shape: &'static str,
    vertices: Vec<(i32, i32)>,
    internal_edges: Vec<(usize, usize)>,
}

impl PatternGraph {
    fn new(
        id: u8,
        shape: &'static str,
        vertices: Vec<(i32, i32)>,
        internal_edges: Vec<(usize, usize)>,
    ) -> Self {
        for &(a, b) in &internal_edges {
            let (p, q) = (vertices[a], vertices[b]);
            assert_eq!(
                (p.0 - q.0).abs() + (p.1 - q.1).abs(),
                1,
                "pattern edge must join lattice neighbors"
            );
        }
        Self {
            id,
            shape,
            vertices,
            internal_edges,
        }
    }

    /// Two vertices joined by an edge.
    pub fn domino() -> Self {
        Self::new(1, "domino", vec![(0, 0), (1, 0)], vec![(0, 1)])
    }

    /// Three vertices in a row.
    pub fn straight_triomino() -> Self {
        Self::new(
            2,
            "straight triomino",
            vec![(0, 0), (1, 0), (2, 0)],
            vec![(0, 1), (1, 2)],
        )
    }

    /// Three vertices forming an L.
    pub fn bent_triomino() -> Self {
        Self::new(
            2,
            "bent triomino",
            vec![(0, 0), (1, 0), (1, -1)],
            vec![(0, 1), (1, 2)],
        )
    }

    /// A center with three arms (T shape).
    pub fn claw() -> Self {
        Self::new(
            3,
            "claw",
            vec![(0, 0), (1, 0), (2, 0), (1, -1)],
            vec![(0, 1), (1, 2), (1, 3)],
        )
    }

    /// A center with four arms.
    pub fn plus() -> Self {
        Self::new(
            4,
            "plus",
            vec![(1, 0), (0, 0), (2, 0), (1, 1), (1, -1)],
            vec![(0, 1), (0, 2), (0, 3), (0, 4)],
        )
    }

    /// Every pattern shape, both triominoes included.
    pub fn all() -> Vec<Self> {
        vec![
            Self::domino(),
            Self::straight_triomino(),
            Self::bent_triomino(),
            Self::claw(),
            Self::plus(),
        ]
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn shape(&self) -> &'static str {
        self.shape
    }

    pub fn vertices(&self) -> &[(i32, i32)] {
        &self.vertices
    }

    pub fn internal_edges(&self) -> &[(usize, usize)] {
        &self.internal_edges
    }

    fn contains(&self, subset: u32, point: (i32, i32)) -> bool {
        self.vertices
            .iter()
            .enumerate()
            .any(|(i, &v)| v == point && subset & (1 << i) != 0)
    }

    /// Number of `Z^2` edges with exactly one endpoint in the subset.
    pub fn edge_boundary(&self, subset: u32) -> usize {
        self.vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| subset & (1 << i) != 0)
            .map(|(_, &(x, y))| {
                [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)]
                    .into_iter()
                    .filter(|&p| !self.contains(subset, p))
                    .count()
            })
            .sum()
    }

    /// Vertices of the subset joined by a pattern edge to another vertex of the subset.
    pub fn non_isolated_in(&self, subset: u32) -> usize {
        (0..self.vertices.len())
            .filter(|&i| {
                subset & (1 << i) != 0
                    && self.internal_edges.iter().any(|&(a, b)| {
                        (a == i && subset & (1 << b) != 0) || (b == i && subset & (1 << a) != 0)
                    })
            })
            .count()
    }

    /// `(edge boundary, non-isolated count)` for every subset, in bitmask order.
    pub fn subset_profile(&self) -> Vec<(usize, usize)> {
        (0..1u32 << self.vertices.len())
            .map(|b| (self.edge_boundary(b), self.non_isolated_in(b)))
            .collect()
    }
}

/// `e^{-h_w |V|} sum_{B subset V} exp(-beta |N(B)| + h_w |q2+(B)|)`, by
/// enumerating all subsets. Requires `h = h_w(beta)`.
pub fn pattern_lhs(pattern: &PatternGraph, params: &Parameters) -> Result<f64> {
    if !params.is_critical() {
        return Err(Error::NotCritical {
            h: params.h(),
            h_w: params.h_w(),
        });
    }
    let (beta, h) = (params.beta(), params.h());
    let mut sum = NeumaierSum::new();
    for (boundary, paired) in pattern.subset_profile() {
        sum.add((-beta * boundary as f64 + h * paired as f64).exp());
    }
    Ok((-h * pattern.vertices.len() as f64).exp() * sum.value())
}

/// Closed-form reference values for the pattern sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PatternReference {
    /// The subset sum equals this value.
    Exact(f64),
    /// The subset sum is at least this value (only connected subsets of size
    /// at most two are counted).
    LowerBound(f64),
}

impl PatternReference {
    pub fn value(&self) -> f64 {
        match *self {
            PatternReference::Exact(v) | PatternReference::LowerBound(v) => v,
        }
    }
}

/// Closed forms for the subset sums of pattern `id` at `h = h_w(beta)`.
pub fn pattern_reference(id: u8, beta: f64) -> Option<PatternReference> {
    let h = critical_h(beta);
    let e = |x: f64| x.exp();
    let value = match id {
        1 => PatternReference::Exact(
            e(-2.0 * h) * (1.0 + 2.0 * e(-4.0 * beta) + e(-6.0 * beta + 2.0 * h)),
        ),
        2 => PatternReference::Exact(
            e(-3.0 * h)
                * (1.0
                    + 3.0 * e(-4.0 * beta)
                    + e(-8.0 * beta)
                    + 2.0 * e(-6.0 * beta + 2.0 * h)
                    + e(-8.0 * beta + 3.0 * h)),
        ),
        3 => PatternReference::LowerBound(
            e(-4.0 * h) * (1.0 + 4.0 * e(-4.0 * beta) + 3.0 * e(-6.0 * beta + 2.0 * h)),
        ),
        4 => PatternReference::LowerBound(
            e(-5.0 * h) * (1.0 + 5.0 * e(-4.0 * beta) + 4.0 * e(-6.0 * beta + 2.0 * h)),
        ),
        _ => return None,
    };
    Some(value)
}

/// `1 + e^{-6 beta} / 2`, the lower bound shared by all four patterns.
pub fn pattern_common_bound(beta: f64) -> f64 {
    1.0 + 0.5 * (-6.0 * beta).exp()
}
