//! Dense states and operators on finite composite Hilbert spaces.
//!
//! Basis convention: the product computational basis is ordered
//! lexicographically with particle 0 as the slowest index, so the amplitude of
//! `|k_0 k_1 ... k_{n-1}>` sits at `sum_j k_j * stride_j` with
//! `stride_j = dims[j+1] * ... * dims[n-1]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{arg, check_dim, Error, Result};
use crate::structures::Bipartition;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for structural validity checks (norm, trace, Hermiticity).
pub const VALIDITY_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Agreement expected between two routes to the same derived quantity.
pub const DERIVED_TOL: f64 = 1e-10;
/// Schmidt coefficients at or below this are dropped from the decomposition.
pub const SCHMIDT_CUTOFF: f64 = 1e-13;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Ordered list of per-particle local dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    dims: Vec<usize>,
    total: usize,
}

impl CompositeSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return arg("composite space needs at least one particle");
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return arg(format!("local dimension {d} < 2"));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Resource(format!("total dimension of {dims:?} overflows")))?;
        Ok(Self { dims, total })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_particles(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Product of the dimensions of `particles`.
    pub fn dim_of(&self, particles: &[usize]) -> usize {
        particles.iter().map(|&p| self.dims[p]).product()
    }

    /// The space spanned by `particles`, in the order given.
    pub fn subspace(&self, particles: &[usize]) -> Result<Self> {
        self.check_particles(particles)?;
        Self::new(particles.iter().map(|&p| self.dims[p]).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { total: self.total * other.total, dims }
    }

    /// Indices in range and pairwise distinct.
    pub fn check_particles(&self, particles: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.dims.len()];
        for &p in particles {
            if p >= self.dims.len() {
                return arg(format!(
                    "particle {p} out of range for {} particles",
                    self.dims.len()
                ));
            }
            if seen[p] {
                return arg(format!("particle {p} listed twice"));
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// Particles not in `particles`, ascending.
    pub fn complement(&self, particles: &[usize]) -> Vec<usize> {
        (0..self.dims.len())
            .filter(|p| !particles.contains(p))
            .collect()
    }
}

/// Index bookkeeping for splitting the basis into a "kept" block (in the given
/// particle order) and the remaining particles (ascending).
struct Split {
    kept_dim: usize,
    rest_dim: usize,
    /// `full[k * rest_dim + r]` is the native basis index for kept index `k`,
    /// remainder index `r`.
    full: Vec<usize>,
}

impl Split {
    fn new(dims: &[usize], kept: &[usize]) -> Self {
        let rest: Vec<usize> = (0..dims.len()).filter(|p| !kept.contains(p)).collect();
        let kept_dim: usize = kept.iter().map(|&p| dims[p]).product();
        let rest_dim: usize = rest.iter().map(|&p| dims[p]).product();
        let total = kept_dim * rest_dim;
        let mut full = vec![0; total];
        let mut digits = vec![0usize; dims.len()];
        for native in 0..total {
            let k = kept.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let r = rest.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            full[k * rest_dim + r] = native;
            // odometer, last particle fastest
            for p in (0..dims.len()).rev() {
                digits[p] += 1;
                if digits[p] < dims[p] {
                    break;
                }
                digits[p] = 0;
            }
        }
        Self {
            kept_dim,
            rest_dim,
            full,
        }
    }

    #[inline]
    fn at(&self, k: usize, r: usize) -> usize {
        self.full[k * self.rest_dim + r]
    }
}

/// Native index -> index in the reordered basis `perm` (a permutation of all
/// particles, slowest first).
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let split = Split::new(dims, perm);
    let mut map = vec![0; split.kept_dim];
    for (k, &native) in split.full.iter().enumerate() {
        map[native] = k;
    }
    map
}

fn check_permutation(dims: &[usize], perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return arg(format!(
            "permutation of length {} for {} particles",
            perm.len(),
            dims.len()
        ));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return arg(format!("{perm:?} is not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reorders the tensor legs of a vector so particle `perm[0]` becomes the
/// slowest index.
pub fn permute_vector(v: &CVector, dims: &[usize], perm: &[usize]) -> Result<CVector> {
    check_permutation(dims, perm)?;
    let map = permutation_map(dims, perm);
    check_dim(map.len(), v.len())?;
    let mut out = CVector::zeros(v.len());
    for (i, &j) in map.iter().enumerate() {
        out[j] = v[i];
    }
    Ok(out)
}

/// Operator counterpart of [`permute_vector`].
pub fn permute_operator(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    check_permutation(dims, perm)?;
    let map = permutation_map(dims, perm);
    check_dim(map.len(), m.nrows())?;
    check_dim(map.len(), m.ncols())?;
    let n = map.len();
    let mut out = CMatrix::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Inverse of a permutation given as a particle order.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Partial trace of an arbitrary square operator, keeping `keep` in the given
/// order. Works on non-Hermitian and traceless operators alike.
pub fn partial_trace_operator(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let split = Split::new(dims, keep);
    let mut out = CMatrix::zeros(split.kept_dim, split.kept_dim);
    for b in 0..split.kept_dim {
        for a in 0..split.kept_dim {
            let mut acc = ZERO;
            for r in 0..split.rest_dim {
                acc += m[(split.at(a, r), split.at(b, r))];
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Lifts `op`, acting on `particles` (in that order), to the full space with
/// identities elsewhere.
pub fn embed_operator(op: &CMatrix, dims: &[usize], particles: &[usize]) -> CMatrix {
    let split = Split::new(dims, particles);
    debug_assert_eq!(op.nrows(), split.kept_dim);
    let n = split.kept_dim * split.rest_dim;
    let mut out = CMatrix::zeros(n, n);
    for r in 0..split.rest_dim {
        for b in 0..split.kept_dim {
            for a in 0..split.kept_dim {
                let v = op[(a, b)];
                if v != ZERO {
                    out[(split.at(a, r), split.at(b, r))] = v;
                }
            }
        }
    }
    out
}

/// Dense product `a * b` through a blocked complex GEMM. nalgebra's generic
/// product for complex scalars is several times slower at dimension ~400.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMatrix::zeros(m, n);
    if m == 0 || k == 0 || n == 0 {
        return out;
    }
    // Complex<f64> is repr(C) {re, im}, so column-major storage is a
    // contiguous run of [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

/// Kronecker product, first factor slowest.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest element of `m - m^dagger`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for c in 0..n {
        for r in 0..=c {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest absolute element.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `f(M)` for Hermitian `M` through its spectral decomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        let fv = f(v);
        scaled.column_mut(c).iter_mut().for_each(|z| *z *= fv);
    }
    scaled * vectors.adjoint()
}

/// Schatten-1 norm (sum of singular values).
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized pure state on a composite space.
#[derive(Clone, Debug)]
pub struct StateVector {
    amplitudes: CVector,
    space: CompositeSpace,
}

impl StateVector {
    pub fn new(space: CompositeSpace, amplitudes: CVector) -> Result<Self> {
        check_dim(space.total_dim(), amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > VALIDITY_TOL {
            return arg(format!("state norm {norm} differs from 1"));
        }
        Ok(Self { amplitudes, space })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(space: CompositeSpace, amplitudes: CVector) -> Result<Self> {
        check_dim(space.total_dim(), amplitudes.len())?;
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return arg("cannot normalize a zero or non-finite vector");
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            space,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(space: CompositeSpace, index: usize) -> Result<Self> {
        if index >= space.total_dim() {
            return arg(format!("basis index {index} out of range"));
        }
        let mut v = CVector::zeros(space.total_dim());
        v[index] = ONE;
        Ok(Self {
            amplitudes: v,
            space,
        })
    }

    pub(crate) fn from_trusted(space: CompositeSpace, amplitudes: CVector) -> Self {
        Self { amplitudes, space }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_trusted(self.space.clone(), m)
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }
}

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
    space: CompositeSpace,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace to [`VALIDITY_TOL`] and positivity to
    /// [`POSITIVITY_TOL`]; the stored matrix is the exact Hermitian part.
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        check_dim(space.total_dim(), matrix.nrows())?;
        check_dim(space.total_dim(), matrix.ncols())?;
        let defect = hermiticity_defect(&matrix);
        if defect > VALIDITY_TOL {
            return arg(format!("density matrix not Hermitian (defect {defect:e})"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > VALIDITY_TOL || tr.im.abs() > VALIDITY_TOL {
            return arg(format!("density matrix trace {tr} differs from 1"));
        }
        let matrix = hermitian_part(&matrix);
        let min = eigvalsh(&matrix)[0];
        if min < -POSITIVITY_TOL {
            return arg(format!("density matrix has eigenvalue {min:e}"));
        }
        Ok(Self { matrix, space })
    }

    pub(crate) fn from_trusted(space: CompositeSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(space.total_dim(), matrix.nrows());
        Self {
            matrix: hermitian_part(&matrix),
            space,
        }
    }

    pub fn maximally_mixed(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        let m = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Self { matrix: m, space }
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(space: CompositeSpace, populations: &[f64]) -> Result<Self> {
        check_dim(space.total_dim(), populations.len())?;
        let m = CMatrix::from_diagonal(&DVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::new(space, m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    /// Reduced state on `keep`, ordered as given. See [`partial_trace`].
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// `tr(rho O)`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (&self.matrix * op).trace()
    }
}

/// Hermitian operator such as a Hamiltonian.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMatrix,
    space: CompositeSpace,
}

impl HermitianOperator {
    pub fn new(space: CompositeSpace, matrix: CMatrix) -> Result<Self> {
        check_dim(space.total_dim(), matrix.nrows())?;
        check_dim(space.total_dim(), matrix.ncols())?;
        let defect = hermiticity_defect(&matrix);
        if defect > VALIDITY_TOL * max_abs(&matrix).max(1.0) {
            return arg(format!("operator not Hermitian (defect {defect:e})"));
        }
        Ok(Self {
            matrix: hermitian_part(&matrix),
            space,
        })
    }

    pub fn zeros(space: CompositeSpace) -> Self {
        let d = space.total_dim();
        Self {
            matrix: CMatrix::zeros(d, d),
            space,
        }
    }

    pub(crate) fn from_trusted(space: CompositeSpace, matrix: CMatrix) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
            space,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }
}

/// Kronecker product carrying space metadata: dims are concatenated.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Self {
        let a = &self.amplitudes;
        let b = &other.amplitudes;
        let v = CVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()]);
        Self {
            amplitudes: v,
            space: self.space.concat(&other.space),
        }
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            space: self.space.concat(&other.space),
        }
    }
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            space: self.space.concat(&other.space),
        }
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Traces out every particle not in `keep`. The result's factors follow the
/// order of `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    if keep.is_empty() || keep.len() >= space.num_particles() {
        return arg(format!(
            "keep set {keep:?} must be a nonempty proper subset of {} particles",
            space.num_particles()
        ));
    }
    let sub = space.subspace(keep)?;
    let m = partial_trace_operator(rho.matrix(), space.dims(), keep);
    Ok(DensityMatrix::from_trusted(sub, m))
}

/// Thermal state `exp(-beta H) / Z`.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return arg(format!("inverse temperature {beta} must be finite and >= 0"));
    }
    let (values, vectors) = eigh(h.matrix());
    let ground = values[0];
    let weights: Vec<f64> = values.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut scaled = vectors.clone();
    for (c, w) in weights.iter().enumerate() {
        let w = C64::new(w / z, 0.0);
        scaled.column_mut(c).iter_mut().for_each(|v| *v *= w);
    }
    Ok(DensityMatrix::from_trusted(
        h.space().clone(),
        scaled * vectors.adjoint(),
    ))
}

/// Schmidt decomposition `|psi> = sum_k c_k |u_k>_S |v_k>_E`.
///
/// Only coefficients above [`SCHMIDT_CUTOFF`] are returned. When coefficients
/// are degenerate the bases are not unique; any valid pair is returned.
#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Descending, strictly positive.
    pub coefficients: Vec<f64>,
    /// Columns are the S-side vectors in the S factor's basis (S particles in
    /// the cut's order).
    pub left: CMatrix,
    /// Columns are the E-side vectors.
    pub right: CMatrix,
    pub s_space: CompositeSpace,
    pub e_space: CompositeSpace,
}

impl Schmidt {
    /// Amplitudes of `sum_k c_k |u_k>|v_k>` in the cut-ordered basis (S first).
    pub fn reconstruct(&self) -> CVector {
        let ds = self.left.nrows();
        let de = self.right.nrows();
        let mut v = CVector::zeros(ds * de);
        for (k, &c) in self.coefficients.iter().enumerate() {
            for a in 0..ds {
                for b in 0..de {
                    v[a * de + b] += self.left[(a, k)] * self.right[(b, k)] * c;
                }
            }
        }
        v
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }
}

pub fn schmidt_decompose(psi: &StateVector, cut: &Bipartition) -> Result<Schmidt> {
    if cut.space() != psi.space() {
        return arg("cut does not partition the state's space");
    }
    let space = psi.space();
    let order = cut.order();
    let v = permute_vector(psi.amplitudes(), space.dims(), &order)?;
    let ds = cut.s_dim();
    let de = cut.e_dim();
    let m = CMatrix::from_fn(ds, de, |a, b| v[a * de + b]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    idx.retain(|&k| svd.singular_values[k] > SCHMIDT_CUTOFF);
    let coefficients = idx.iter().map(|&k| svd.singular_values[k]).collect();
    // M = sum_k s_k u_k v_k^dagger, so the E-side vector is row k of v_t.
    let left = CMatrix::from_fn(ds, idx.len(), |a, k| u[(a, idx[k])]);
    let right = CMatrix::from_fn(de, idx.len(), |b, k| v_t[(idx[k], b)]);
    Ok(Schmidt {
        coefficients,
        left,
        right,
        s_space: space.subspace(cut.s_particles())?,
        e_space: space.subspace(cut.e_particles())?,
    })
}

/// `1/2 ||a - b||_1`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dim(a.space().total_dim(), b.space().total_dim())?;
    if a.space() != b.space() {
        return arg("trace distance between states on different spaces");
    }
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}
