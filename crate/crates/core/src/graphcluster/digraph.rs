use crate::flowmatrix::{FlowMatrix, RegionId};

/// Weighted directed edge between node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Digraph over the nodes of a flow matrix. Arcs carry finite positive
/// weights and there is at most one arc per (src, dst) pair; arcs are stored
/// sorted by (src, dst).
#[derive(Debug, Clone)]
pub struct ThresholdDigraph {
    n: usize,
    arcs: Vec<Arc>,
    labels: Vec<RegionId>,
}

impl ThresholdDigraph {
    pub(crate) fn new(n: usize, arcs: Vec<Arc>, labels: Vec<RegionId>) -> Self {
        debug_assert!(arcs
            .iter()
            .all(|a| a.src < n && a.dst < n && a.weight > 0.0 && a.weight.is_finite()));
        debug_assert!(arcs.windows(2).all(|w| (w[0].src, w[0].dst) < (w[1].src, w[1].dst)));
        ThresholdDigraph { n, arcs, labels }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    #[inline]
    pub fn labels(&self) -> &[RegionId] {
        &self.labels
    }

    /// Out-neighbor lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for a in &self.arcs {
            adj[a.src].push(a.dst);
        }
        adj
    }
}

/// Digraph whose arcs are the unit entries of `b`: all (i, j) with
/// |b[i][j] - 1| <= unit_tolerance. Arc weight is the literal 1.0.
pub fn unit_entry_digraph(b: &FlowMatrix, unit_tolerance: f64) -> ThresholdDigraph {
    let n = b.n();
    let mut arcs = Vec::new();
    for i in 0..n {
        for (j, &v) in b.dense().row(i).iter().enumerate() {
            if (v - 1.0).abs() <= unit_tolerance {
                arcs.push(Arc {
                    src: i,
                    dst: j,
                    weight: 1.0,
                });
            }
        }
    }
    ThresholdDigraph::new(n, arcs, b.labels().to_vec())
}

/// Digraph whose arcs are the off-diagonal cells with b[i][j] >= t and
/// b[i][j] > 0, weighted by the cell value. Requiring strict positivity keeps
/// the digraph free of zero-weight arcs when t = 0.
pub fn threshold_digraph(b: &FlowMatrix, t: f64) -> ThresholdDigraph {
    let n = b.n();
    let mut arcs = Vec::new();
    for i in 0..n {
        for (j, &v) in b.dense().row(i).iter().enumerate() {
            if i != j && v >= t && v > 0.0 {
                arcs.push(Arc {
                    src: i,
                    dst: j,
                    weight: v,
                });
            }
        }
    }
    ThresholdDigraph::new(n, arcs, b.labels().to_vec())
}
