//! Quadrature node sets on the unit sphere and the velocity-moment tensors
//! consumed by the low-rank substeps.
//!
//! Node tables are vendored as plain-text files (one `x y z w` line per
//! node, weights summing to 1); the loader rescales weights to `4*pi`. A
//! tensor-product Gauss-Legendre x equispaced-azimuth rule is available
//! behind the same interface for resolutions without a shipped table.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::util::Accumulator;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Velocity component index: 0 = xi, 1 = eta, 2 = gamma.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VComp {
    Xi = 0,
    Eta = 1,
    Gamma = 2,
}

/// Quadrature nodes on S^2 with weights summing to `4*pi`.
#[derive(Debug, Clone)]
pub struct VelocitySet {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl VelocitySet {
    /// Directory with the vendored node tables, as checked out in the repo.
    pub fn default_data_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lebedev")
    }

    /// Load the `n`-point table from the default data directory.
    pub fn lebedev(n: usize) -> Result<Self> {
        Self::lebedev_from(&Self::default_data_dir(), n)
    }

    /// Load the `n`-point table from `dir`.
    pub fn lebedev_from(dir: &Path, n: usize) -> Result<Self> {
        let path = dir.join(format!("lebedev_{n:04}.txt"));
        if !path.is_file() {
            return Err(Error::UnknownVelocitySetSize {
                requested: n,
                available: Self::available_sizes(dir),
            });
        }
        let text = std::fs::read_to_string(&path)?;
        let malformed = |detail: String| Error::MalformedVelocityTable {
            path: path.display().to_string(),
            detail,
        };
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace().map(|t| t.parse::<f64>());
            let mut next = |name: &str| -> Result<f64> {
                cols.next()
                    .ok_or_else(|| malformed(format!("line {}: missing {name}", lineno + 1)))?
                    .map_err(|e| malformed(format!("line {}: {e}", lineno + 1)))
            };
            let x = next("x")?;
            let y = next("y")?;
            let z = next("z")?;
            let w = next("w")?;
            nodes.push([x, y, z]);
            weights.push(w);
        }
        if nodes.len() != n {
            return Err(malformed(format!(
                "expected {n} nodes, found {}",
                nodes.len()
            )));
        }
        let set = Self::from_raw(nodes, weights);
        set.validate().map_err(|e| malformed(e.to_string()))?;
        Ok(set)
    }

    /// Table sizes present in `dir`, sorted ascending.
    pub fn available_sizes(dir: &Path) -> Vec<usize> {
        let mut sizes = Vec::new();
        if let Ok(entries) = std::fs::read_dir(dir) {
            for entry in entries.flatten() {
                let name = entry.file_name();
                let name = name.to_string_lossy();
                if let Some(num) = name
                    .strip_prefix("lebedev_")
                    .and_then(|s| s.strip_suffix(".txt"))
                {
                    if let Ok(n) = num.parse::<usize>() {
                        sizes.push(n);
                    }
                }
            }
        }
        sizes.sort_unstable();
        sizes
    }

    /// Fallback product rule: Gauss-Legendre in the polar cosine times an
    /// equispaced azimuth. Exact for the low moments the scheme relies on
    /// when `n_polar >= 2` and `n_azimuth >= 4` is even. Not used by any
    /// shipped benchmark; available for resolution studies.
    pub fn gauss_product(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar < 2 || n_azimuth < 4 || n_azimuth % 2 != 0 {
            return Err(Error::InvalidConfig {
                field: "gauss_product".into(),
                detail: format!(
                    "need n_polar >= 2 and even n_azimuth >= 4, got {n_polar}/{n_azimuth}"
                ),
            });
        }
        let (mu, wmu) = gauss_legendre(n_polar);
        let dphi = 2.0 * std::f64::consts::PI / n_azimuth as f64;
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (m, wm) in mu.iter().zip(&wmu) {
            let s = (1.0 - m * m).max(0.0).sqrt();
            for j in 0..n_azimuth {
                let phi = dphi * j as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), *m]);
                weights.push(wm * dphi);
            }
        }
        let set = Self::from_raw(nodes, weights);
        set.validate()?;
        Ok(set)
    }

    fn from_raw(nodes: Vec<[f64; 3]>, mut weights: Vec<f64>) -> Self {
        // Rescale so the weights sum to exactly 4*pi regardless of how the
        // table was normalized.
        let total: f64 = {
            let mut acc = Accumulator::new();
            for &w in &weights {
                acc.add(w);
            }
            acc.value()
        };
        let scale = FOUR_PI / total;
        for w in &mut weights {
            *w *= scale;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn component(&self, m: usize, comp: VComp) -> f64 {
        self.nodes[m][comp as usize]
    }

    /// Quadrature approximation of the sphere integral of `f * g`.
    pub fn inner_v(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        debug_assert_eq!(g.len(), self.len());
        let mut acc = Accumulator::new();
        for ((w, a), b) in self.weights.iter().zip(f).zip(g) {
            acc.add(w * a * b);
        }
        acc.value()
    }

    /// Quadrature approximation of the sphere integral of `f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let mut acc = Accumulator::new();
        for (w, a) in self.weights.iter().zip(f) {
            acc.add(w * a);
        }
        acc.value()
    }

    /// Check the node-set identities the scheme relies on: unit-norm nodes,
    /// total weight `4*pi`, vanishing first moment, and isotropic second
    /// moment `<v (x) v> = (4*pi/3) I`. Second moments accumulate more
    /// rounding at large node counts, hence the looser tolerance.
    pub fn validate(&self) -> Result<()> {
        let fail = |detail: String| Error::InvalidConfig {
            field: "velocity set".into(),
            detail,
        };
        for (i, v) in self.nodes.iter().enumerate() {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (r - 1.0).abs() > 1e-12 {
                return Err(fail(format!("node {i} has norm {r}")));
            }
        }
        if self.weights.iter().any(|w| *w <= 0.0) {
            return Err(fail("non-positive weight".into()));
        }
        let total = self.integrate(&vec![1.0; self.len()]);
        if (total - FOUR_PI).abs() > 1e-10 {
            return Err(fail(format!("weights sum to {total}, expected 4*pi")));
        }
        for comp in 0..3 {
            let mut m1 = Accumulator::new();
            for (w, v) in self.weights.iter().zip(&self.nodes) {
                m1.add(w * v[comp]);
            }
            if m1.value().abs() > 1e-10 {
                return Err(fail(format!("first moment component {comp} = {}", m1.value())));
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut m2 = Accumulator::new();
                for (w, v) in self.weights.iter().zip(&self.nodes) {
                    m2.add(w * v[i] * v[j]);
                }
                let expect = if i == j { FOUR_PI / 3.0 } else { 0.0 };
                if (m2.value() - expect).abs() > 1e-8 {
                    return Err(fail(format!(
                        "second moment ({i},{j}) = {}, expected {expect}",
                        m2.value()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes/weights on [-1, 1] via the Golub-Welsch eigenvalue
/// problem for the Jacobi matrix.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            (eig.eigenvalues[i], w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Basis columns sampled at the velocity nodes, orthonormal in the weighted
/// inner product `<f,g>_v = sum w f g`.
#[derive(Debug, Clone)]
pub struct VBasis {
    pub vset: Arc<VelocitySet>,
    /// `n x r` values, column `j` holding `V_j` at the nodes.
    pub values: DMatrix<f64>,
}

/// Per-column mean and flux moments of a basis: `mean_j = <V_j>_v` and
/// `flux[comp][j] = <v_comp V_j>_v`.
#[derive(Debug, Clone)]
pub struct Moments {
    pub mean: DVector<f64>,
    pub flux: [DVector<f64>; 3],
}

/// The four projected advection matrices
/// `T[d,s]_{jl} = <d^s V_j V_l>_v - (1/4pi) <V_j>_v <d^s V_l>_v`
/// for `d` in `{xi, eta}` and `s` the positive/negative part.
#[derive(Debug, Clone)]
pub struct TransportTensors {
    pub xi_plus: DMatrix<f64>,
    pub xi_minus: DMatrix<f64>,
    pub eta_plus: DMatrix<f64>,
    pub eta_minus: DMatrix<f64>,
}

impl TransportTensors {
    /// Unsplit tensor for one direction (the sum of the signed parts).
    pub fn unsplit(&self, comp: VComp) -> DMatrix<f64> {
        match comp {
            VComp::Xi => &self.xi_plus + &self.xi_minus,
            VComp::Eta => &self.eta_plus + &self.eta_minus,
            VComp::Gamma => panic!("no transport in the homogeneous direction"),
        }
    }
}

impl VBasis {
    pub fn new(vset: Arc<VelocitySet>, values: DMatrix<f64>) -> Self {
        assert_eq!(values.nrows(), vset.len(), "VBasis row count");
        Self { vset, values }
    }

    pub fn rank(&self) -> usize {
        self.values.ncols()
    }

    /// Largest deviation of `<V_i, V_j>_v` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let r = self.rank();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i..r {
                let ip = self
                    .vset
                    .inner_v(self.values.column(i).as_slice(), self.values.column(j).as_slice());
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - expect).abs());
            }
        }
        worst
    }

    pub fn moments(&self) -> Moments {
        let n = self.vset.len();
        let r = self.rank();
        let w = self.vset.weights();
        let mut mean = DVector::zeros(r);
        let mut flux = [
            DVector::zeros(r),
            DVector::zeros(r),
            DVector::zeros(r),
        ];
        for j in 0..r {
            let col = self.values.column(j);
            let mut am = Accumulator::new();
            let mut af = [Accumulator::new(), Accumulator::new(), Accumulator::new()];
            for m in 0..n {
                let wv = w[m] * col[m];
                am.add(wv);
                let node = self.vset.nodes()[m];
                for c in 0..3 {
                    af[c].add(wv * node[c]);
                }
            }
            mean[j] = am.value();
            for c in 0..3 {
                flux[c][j] = af[c].value();
            }
        }
        Moments { mean, flux }
    }

    /// Assemble the four sign-split advection tensors. Each tensor is exactly
    /// linear in every basis column.
    pub fn transport_tensors(&self) -> TransportTensors {
        let tensor = |comp: VComp, positive: bool| -> DMatrix<f64> {
            let n = self.vset.len();
            let r = self.rank();
            let w = self.vset.weights();
            // Row-scaled copy W = diag(w * d^s) V, so <d^s V_j V_l> = V^T W.
            let mut scaled = self.values.clone();
            let mut dsgn = vec![0.0; n];
            for m in 0..n {
                let d = self.vset.component(m, comp);
                let ds = if positive { d.max(0.0) } else { d.min(0.0) };
                dsgn[m] = w[m] * ds;
            }
            for j in 0..r {
                let mut col = scaled.column_mut(j);
                for m in 0..n {
                    col[m] *= dsgn[m];
                }
            }
            let sym = self.values.transpose() * &scaled;
            // mean_j = <V_j>, dflux_l = <d^s V_l> (= column sums of W).
            let wvec = DVector::from_column_slice(w);
            let mean = self.values.transpose() * &wvec;
            let dflux = scaled.row_sum_tr();
            sym - (&mean * dflux.transpose()) / FOUR_PI
        };
        TransportTensors {
            xi_plus: tensor(VComp::Xi, true),
            xi_minus: tensor(VComp::Xi, false),
            eta_plus: tensor(VComp::Eta, true),
            eta_minus: tensor(VComp::Eta, false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lebedev(n: usize) -> Arc<VelocitySet> {
        Arc::new(VelocitySet::lebedev(n).expect("table loads"))
    }

    #[test]
    fn six_point_set_is_the_octahedron() {
        let set = VelocitySet::lebedev(6).unwrap();
        assert_eq!(set.len(), 6);
        for w in set.weights() {
            assert_abs_diff_eq!(*w, FOUR_PI / 6.0, epsilon = 1e-13);
        }
        // Every node is +-e_i for some axis.
        for v in set.nodes() {
            let ones = v.iter().filter(|c| c.abs() > 0.5).count();
            assert_eq!(ones, 1);
            let big = v.iter().find(|c| c.abs() > 0.5).unwrap();
            assert_abs_diff_eq!(big.abs(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn shipped_tables_satisfy_moment_identities() {
        for n in [6, 26, 86, 110, 146, 194, 302, 590] {
            let set = VelocitySet::lebedev(n).unwrap();
            set.validate().unwrap_or_else(|e| panic!("n={n}: {e}"));
        }
    }

    #[test]
    fn unknown_size_lists_available_tables() {
        let err = VelocitySet::lebedev(7).unwrap_err();
        match err {
            Error::UnknownVelocitySetSize { requested, available } => {
                assert_eq!(requested, 7);
                assert!(available.contains(&6));
                assert!(available.contains(&590));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn malformed_table_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("lebedev_0004.txt"), "0 0 1 nope\n").unwrap();
        let err = VelocitySet::lebedev_from(dir.path(), 4).unwrap_err();
        assert!(matches!(err, Error::MalformedVelocityTable { .. }), "{err}");
    }

    #[test]
    fn gauss_product_fallback_matches_interface() {
        let set = VelocitySet::gauss_product(8, 16).unwrap();
        assert_eq!(set.len(), 128);
        set.validate().unwrap();
        assert!(VelocitySet::gauss_product(1, 16).is_err());
        assert!(VelocitySet::gauss_product(8, 7).is_err());
    }

    #[test]
    fn moments_of_reference_columns() {
        let set = lebedev(26);
        let n = set.len();
        let c = 1.0 / FOUR_PI.sqrt();
        let xi_norm = (FOUR_PI / 3.0).sqrt();
        let mut values = DMatrix::zeros(n, 3);
        for m in 0..n {
            values[(m, 0)] = c;
            values[(m, 1)] = set.component(m, VComp::Xi) / xi_norm;
            values[(m, 2)] = 0.0;
        }
        let basis = VBasis::new(set, values);
        let mom = basis.moments();
        assert_abs_diff_eq!(mom.mean[0], FOUR_PI.sqrt(), epsilon = 1e-12);
        for c in 0..3 {
            assert_abs_diff_eq!(mom.flux[c][0], 0.0, epsilon = 1e-12);
        }
        // <xi * xi>/||xi|| = sqrt(4pi/3); odd moments vanish.
        assert_abs_diff_eq!(mom.flux[0][1], (FOUR_PI / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(mom.flux[1][1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mom.flux[2][1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mom.mean[2], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mom.flux[0][2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tensors_annihilate_constants() {
        let set = lebedev(26);
        let n = set.len();
        let values = DMatrix::from_element(n, 1, 1.0 / FOUR_PI.sqrt());
        let t = VBasis::new(set, values).transport_tensors();
        for m in [&t.xi_plus, &t.xi_minus, &t.eta_plus, &t.eta_minus] {
            assert_abs_diff_eq!(m[(0, 0)], 0.0, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(t.unsplit(VComp::Xi)[(0, 0)], 0.0, epsilon = 1e-13);
    }

    /// Gram-Schmidt in the weighted inner product, test-local.
    fn orthonormalize(set: &Arc<VelocitySet>, mut m: DMatrix<f64>) -> DMatrix<f64> {
        for j in 0..m.ncols() {
            for i in 0..j {
                let proj = set.inner_v(m.column(i).as_slice(), m.column(j).as_slice());
                let prev = m.column(i).clone_owned();
                m.column_mut(j).axpy(-proj, &prev, 1.0);
            }
            let norm = set
                .inner_v(m.column(j).as_slice(), m.column(j).as_slice())
                .sqrt();
            m.column_mut(j).scale_mut(1.0 / norm);
        }
        m
    }

    #[test]
    fn split_tensors_sum_to_unsplit() {
        use rand::{Rng, SeedableRng};
        let set = lebedev(86);
        let n = set.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let raw = DMatrix::from_fn(n, 4, |_, _| rng.gen_range(-1.0..1.0));
        let basis = VBasis::new(set.clone(), orthonormalize(&set, raw));
        let t = basis.transport_tensors();

        // Independent oracle: brute-force quadrature of the unsplit tensor.
        let mom = basis.moments();
        for (comp, split) in [
            (VComp::Xi, &t.xi_plus + &t.xi_minus),
            (VComp::Eta, &t.eta_plus + &t.eta_minus),
        ] {
            for j in 0..4 {
                for l in 0..4 {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += set.weights()[m]
                            * set.component(m, comp)
                            * basis.values[(m, j)]
                            * basis.values[(m, l)];
                    }
                    let oracle = acc - mom.mean[j] * mom.flux[comp as usize][l] / FOUR_PI;
                    assert_abs_diff_eq!(split[(j, l)], oracle, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn two_column_tensor_against_brute_force() {
        let set = lebedev(110);
        let n = set.len();
        let c = 1.0 / FOUR_PI.sqrt();
        let xi_norm = (FOUR_PI / 3.0).sqrt();
        let mut values = DMatrix::zeros(n, 2);
        for m in 0..n {
            values[(m, 0)] = c;
            values[(m, 1)] = set.component(m, VComp::Xi) / xi_norm;
        }
        let t = VBasis::new(set.clone(), values.clone()).transport_tensors();
        let unsplit = t.unsplit(VComp::Xi);
        // Brute force over nodes, assembled without the matrix shortcut.
        let mut oracle = DMatrix::zeros(2, 2);
        for j in 0..2 {
            for l in 0..2 {
                let (mut sym, mut mj, mut fl) = (0.0, 0.0, 0.0);
                for m in 0..n {
                    let w = set.weights()[m];
                    let xi = set.component(m, VComp::Xi);
                    sym += w * xi * values[(m, j)] * values[(m, l)];
                    mj += w * values[(m, j)];
                    fl += w * xi * values[(m, l)];
                }
                oracle[(j, l)] = sym - mj * fl / FOUR_PI;
            }
        }
        assert_abs_diff_eq!((unsplit - &oracle).norm(), 0.0, epsilon = 1e-12);
        // The projection makes this matrix strictly lower triangular here:
        // T_12 cancels exactly, T_21 = 1/sqrt(3).
        assert_abs_diff_eq!(oracle[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle[(1, 0)], 1.0 / 3.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn tensors_are_linear_in_each_column() {
        use rand::{Rng, SeedableRng};
        let set = lebedev(26);
        let n = set.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let base = DMatrix::from_fn(n, 3, |_, _| rng.gen_range(-1.0..1.0));
        let t0 = VBasis::new(set.clone(), base.clone()).transport_tensors();
        let alpha = 2.5;
        let mut scaled = base.clone();
        scaled.column_mut(1).scale_mut(alpha);
        let t1 = VBasis::new(set, scaled).transport_tensors();
        for (a, b) in [(&t0.xi_plus, &t1.xi_plus), (&t0.eta_minus, &t1.eta_minus)] {
            for j in 0..3 {
                for l in 0..3 {
                    let mut expect = a[(j, l)];
                    if j == 1 {
                        expect *= alpha;
                    }
                    if l == 1 {
                        expect *= alpha;
                    }
                    assert_abs_diff_eq!(b[(j, l)], expect, epsilon = 1e-12);
                }
            }
        }
    }
}
