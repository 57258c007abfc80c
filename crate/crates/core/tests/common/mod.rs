// Shared generators and oracles for the integration suites.
//
// The oracles are deliberately built on different algorithms than the
// library: reach-set closure instead of Tarjan, a KKT linear solve instead of
// the closed-form affine projection, simplex-parameterized projected gradient
// instead of Dykstra, and nalgebra's Schur instead of our own. Agreement
// between two independent routes is the point; none of these helpers call
// back into the code paths they check.
#![allow(dead_code)]

use flowbalance::dense::Dense;
use flowbalance::flowmatrix::{FlowMatrix, RegionId};
use flowbalance::graphcluster::Partition;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Region codes with rotating two-character state prefixes, so census tests
/// see both intrastate and interstate components.
pub fn labels(n: usize) -> Vec<RegionId> {
    (0..n)
        .map(|i| RegionId::new(format!("{:02}{:03}", (i % 7) + 10, i)).unwrap())
        .collect()
}

/// Labels that all share one state prefix.
pub fn labels_one_state(n: usize) -> Vec<RegionId> {
    (0..n)
        .map(|i| RegionId::new(format!("42{:03}", i)).unwrap())
        .collect()
}

pub fn fm(d: Dense) -> FlowMatrix {
    let n = d.n();
    FlowMatrix::from_dense(d, labels(n)).unwrap()
}

pub fn random_positive_dense(n: usize, r: &mut ChaCha8Rng) -> Dense {
    let data: Vec<f64> = (0..n * n).map(|_| r.gen_range(0.05..1.0)).collect();
    Dense::from_vec(n, data).unwrap()
}

/// Non-negative matrix where roughly `density` of the off-diagonal cells are
/// positive. The diagonal is zero.
pub fn random_hollow_sparse(n: usize, density: f64, r: &mut ChaCha8Rng) -> Dense {
    let mut d = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && r.gen_range(0.0..1.0) < density {
                d.set(i, j, r.gen_range(0.05..1.0));
            }
        }
    }
    d
}

pub fn random_permutation(n: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(r);
    p
}

/// Permutation with no fixed point (n >= 2). Rejection sampling is fine at
/// these sizes: the fixed-point-free fraction tends to 1/e.
pub fn random_derangement(n: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    assert!(n >= 2);
    loop {
        let p = random_permutation(n, r);
        if p.iter().enumerate().all(|(i, &j)| i != j) {
            return p;
        }
    }
}

/// 0/1 matrix of the permutation: row i has its unit in column perm[i].
pub fn permutation_dense(perm: &[usize]) -> Dense {
    let n = perm.len();
    let mut d = Dense::zeros(n);
    for (i, &j) in perm.iter().enumerate() {
        d.set(i, j, 1.0);
    }
    d
}

/// Hollow matrix with every row and column occupied: a positively weighted
/// sum of derangement permutation matrices.
pub fn hollow_full_support(n: usize, terms: usize, r: &mut ChaCha8Rng) -> Dense {
    let mut d = Dense::zeros(n);
    for _ in 0..terms.max(1) {
        let perm = random_derangement(n, r);
        let w = r.gen_range(0.2..1.0);
        for (i, &j) in perm.iter().enumerate() {
            let v = d.get(i, j);
            d.set(i, j, v + w);
        }
    }
    d
}

/// Convex combination of `terms` random permutation matrices: an exactly
/// doubly stochastic matrix up to summation round-off.
pub fn random_doubly_stochastic(n: usize, terms: usize, r: &mut ChaCha8Rng) -> Dense {
    let mut w: Vec<f64> = (0..terms.max(1)).map(|_| r.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    let mut d = Dense::zeros(n);
    for &wk in &w {
        let perm = random_permutation(n, r);
        for (i, &j) in perm.iter().enumerate() {
            let v = d.get(i, j);
            d.set(i, j, v + wk);
        }
    }
    d
}

pub fn frob_dist_sq(a: &Dense, b: &Dense) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Assignment vector of a partition, component ids as produced by the
/// library (smallest member index).
pub fn partition_assignment(p: &Partition) -> Vec<usize> {
    (0..p.n()).map(|v| p.component_of(v)).collect()
}

/// Renumber an arbitrary assignment so each class is named by its smallest
/// member, matching the library's convention.
pub fn normalize_assignment(raw: &[usize]) -> Vec<usize> {
    let mut smallest: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for (v, &c) in raw.iter().enumerate() {
        smallest.entry(c).or_insert(v);
    }
    raw.iter().map(|c| smallest[c]).collect()
}

// ---------------------------------------------------------------------------
// Graph oracles: bitset transitive closure and BFS.

struct BitRows {
    words: usize,
    rows: Vec<u64>,
}

impl BitRows {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitRows {
            words,
            rows: vec![0u64; n * words],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1u64 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] & (1u64 << (j % 64)) != 0
    }

    fn or_row_into(&mut self, src: usize, dst: usize) {
        let (w, s, d) = (self.words, src * self.words, dst * self.words);
        for k in 0..w {
            let v = self.rows[s + k];
            self.rows[d + k] |= v;
        }
    }
}

/// Strong components by reflexive transitive closure: i and j share a class
/// iff each reaches the other. Floyd-Warshall style closure over bitset rows.
pub fn scc_closure_oracle(n: usize, arcs: &[(usize, usize)]) -> Vec<usize> {
    let mut reach = BitRows::new(n);
    for i in 0..n {
        reach.set(i, i);
    }
    for &(s, d) in arcs {
        reach.set(s, d);
    }
    for k in 0..n {
        for i in 0..n {
            if reach.get(i, k) {
                reach.or_row_into(k, i);
            }
        }
    }
    let mut assign = vec![usize::MAX; n];
    for i in 0..n {
        if assign[i] != usize::MAX {
            continue;
        }
        assign[i] = i;
        for j in (i + 1)..n {
            if assign[j] == usize::MAX && reach.get(i, j) && reach.get(j, i) {
                assign[j] = i;
            }
        }
    }
    normalize_assignment(&assign)
}

/// Weak components by breadth-first search over the symmetrized arc set.
pub fn weak_bfs_oracle(n: usize, arcs: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(s, d) in arcs {
        if s != d {
            adj[s].push(d);
            adj[d].push(s);
        }
    }
    let mut assign = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if assign[start] != usize::MAX {
            continue;
        }
        assign[start] = start;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if assign[w] == usize::MAX {
                    assign[w] = start;
                    queue.push_back(w);
                }
            }
        }
    }
    normalize_assignment(&assign)
}

// ---------------------------------------------------------------------------
// Equality-constrained least squares oracle for the affine projection.
//
// min ||y - x||^2 subject to all row sums = 1 and the first n-1 column sums
// = 1 (the last column constraint is implied). KKT: y = x + A^T mu with
// (A A^T) mu = b - A x, solved by LU.

pub fn kkt_affine_oracle(x: &Dense) -> Vec<f64> {
    let n = x.n();
    let m = 2 * n - 1;
    let mut a = DMatrix::<f64>::zeros(m, n * n);
    for i in 0..n {
        for j in 0..n {
            a[(i, i * n + j)] = 1.0;
        }
    }
    for j in 0..n - 1 {
        for i in 0..n {
            a[(n + j, i * n + j)] = 1.0;
        }
    }
    let xv = DMatrix::<f64>::from_row_slice(n * n, 1, x.as_slice());
    let b = DMatrix::<f64>::from_element(m, 1, 1.0);
    let rhs = &b - &a * &xv;
    let aat = &a * a.transpose();
    let mu = aat
        .lu()
        .solve(&rhs)
        .expect("KKT system is nonsingular for full-rank constraints");
    let y = &xv + a.transpose() * mu;
    y.iter().copied().collect()
}

// ---------------------------------------------------------------------------
// Projected-gradient oracle for the Euclidean projection onto the doubly
// stochastic polytope, for small n.
//
// Every doubly stochastic matrix is a convex combination of permutation
// matrices, so for n <= 4 the projection problem is a quadratic program over
// the simplex of weights on all n! permutations:
//
//   min_w  || sum_p w_p P_p - A ||_F^2,   w in the probability simplex.
//
// Accelerated projected gradient with a fixed 1/L step and monotone restarts,
// run from several random starts. The weight vector is not unique (the
// Birkhoff decomposition is redundant) but the objective minimum and the
// matrix it produces are.

pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm, iterative form.
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    out.push(p.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            out.push(p.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Euclidean projection of v onto the probability simplex.
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (idx, &ui) in u.iter().enumerate() {
        acc += ui;
        let cand = (acc - 1.0) / (idx + 1) as f64;
        if ui - cand > 0.0 {
            theta = cand;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

pub struct BirkhoffOracle {
    /// Smallest squared Frobenius distance found.
    pub sq_dist: f64,
    /// The matrix attaining it, row-major.
    pub matrix: Vec<f64>,
}

pub fn birkhoff_projection_oracle(a: &Dense, starts: usize, seed: u64) -> BirkhoffOracle {
    let n = a.n();
    let perms = all_permutations(n);
    let m = perms.len();

    // Gram matrix of vectorized permutations: entries count agreeing images.
    let mut g = vec![0.0f64; m * m];
    for r in 0..m {
        for s in 0..m {
            g[r * m + s] = perms[r]
                .iter()
                .zip(&perms[s])
                .filter(|(x, y)| x == y)
                .count() as f64;
        }
    }
    let c: Vec<f64> = perms
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| a.get(i, j)).sum())
        .collect();
    let aa: f64 = a.as_slice().iter().map(|v| v * v).sum();

    let matvec = |w: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|r| (0..m).map(|s| g[r * m + s] * w[s]).sum())
            .collect()
    };
    let objective = |w: &[f64], gw: &[f64]| -> f64 {
        let wgw: f64 = w.iter().zip(gw).map(|(x, y)| x * y).sum();
        let cw: f64 = w.iter().zip(&c).map(|(x, y)| x * y).sum();
        wgw - 2.0 * cw + aa
    };

    // Lipschitz constant of the gradient: 2 lambda_max(G), by power iteration.
    let mut v = vec![1.0 / m as f64; m];
    let mut lam = 0.0;
    for _ in 0..200 {
        let gv = matvec(&v);
        lam = gv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if lam == 0.0 {
            break;
        }
        v = gv.iter().map(|x| x / lam).collect();
    }
    let step = 1.0 / (2.05 * lam.max(1.0));

    let mut r = rng(seed);
    let mut best_f = f64::INFINITY;
    let mut best_w = vec![0.0; m];
    for _ in 0..starts.max(1) {
        let raw: Vec<f64> = (0..m)
            .map(|_| -(1.0 - r.gen_range(0.0f64..1.0)).ln())
            .collect();
        let s: f64 = raw.iter().sum();
        let mut x: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut fx = {
            let gx = matvec(&x);
            objective(&x, &gx)
        };
        let mut stall = 0;
        for _ in 0..20_000 {
            let gy = matvec(&y);
            let grad: Vec<f64> = gy.iter().zip(&c).map(|(gv, cv)| 2.0 * (gv - cv)).collect();
            let cand: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - step * gi).collect();
            let xn = simplex_project(&cand);
            let gxn = matvec(&xn);
            let fxn = objective(&xn, &gxn);
            if fxn > fx {
                // Monotone restart: drop momentum and retry from x.
                y = x.clone();
                t = 1.0;
                stall += 1;
                if stall > 50 {
                    break;
                }
                continue;
            }
            let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / tn;
            y = xn
                .iter()
                .zip(&x)
                .map(|(nc, oc)| nc + beta * (nc - oc))
                .collect();
            t = tn;
            let drop = fx - fxn;
            x = xn;
            fx = fxn;
            if drop <= 1e-14 * fx.abs().max(1.0) {
                stall += 1;
                if stall > 100 {
                    break;
                }
            } else {
                stall = 0;
            }
        }
        if fx < best_f {
            best_f = fx;
            best_w = x;
        }
    }

    let mut matrix = vec![0.0f64; n * n];
    for (p, &wp) in perms.iter().zip(&best_w) {
        for (i, &j) in p.iter().enumerate() {
            matrix[i * n + j] += wp;
        }
    }
    BirkhoffOracle {
        sq_dist: best_f.max(0.0),
        matrix,
    }
}

// ---------------------------------------------------------------------------
// Dense eigenvalue oracle.

pub fn nalgebra_eigenvalues(d: &Dense) -> Vec<Complex64> {
    let n = d.n();
    let m = DMatrix::<f64>::from_row_slice(n, n, d.as_slice());
    m.complex_eigenvalues().iter().copied().collect()
}

/// Greedy matching: every element of `got` must lie within `tol` of a
/// distinct element of `expected`. Returns the worst matched distance, or
/// None if some element cannot be matched.
pub fn match_eigenvalues(got: &[Complex64], expected: &[Complex64], tol: f64) -> Option<f64> {
    let mut used = vec![false; expected.len()];
    let mut worst = 0.0f64;
    for g in got {
        let mut best: Option<(usize, f64)> = None;
        for (idx, e) in expected.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let dist = (g - e).norm();
            if best.map_or(true, |(_, d)| dist < d) {
                best = Some((idx, dist));
            }
        }
        match best {
            Some((idx, dist)) if dist <= tol => {
                used[idx] = true;
                worst = worst.max(dist);
            }
            _ => return None,
        }
    }
    Some(worst)
}
