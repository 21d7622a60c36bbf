//! System/environment splits of a composite space and the re-factorizations
//! between them.

use std::fmt;

use crate::error::{arg, check_dim, Result};
use crate::hilbert::{
    inverse_permutation, kron, max_abs, partial_trace_operator, permute_operator,
    permute_vector, CMatrix, CVector, CompositeSpace, DensityMatrix, StateVector, C64, ONE,
};

/// Deviation from `u^dagger u = I` accepted for structure unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Which side of a bipartition a particle moves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    SystemToEnvironment,
    EnvironmentToSystem,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Self::SystemToEnvironment => Self::EnvironmentToSystem,
            Self::EnvironmentToSystem => Self::SystemToEnvironment,
        }
    }
}

/// Split of the particles of a space into an open system S and an
/// environment E. Both sides keep their own ordering, which fixes the basis of
/// the S and E factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    space: CompositeSpace,
    s: Vec<usize>,
    e: Vec<usize>,
}

impl Bipartition {
    pub fn new(space: CompositeSpace, s: Vec<usize>, e: Vec<usize>) -> Result<Self> {
        if s.is_empty() || e.is_empty() {
            return arg("both sides of a bipartition must be nonempty");
        }
        let mut all = s.clone();
        all.extend_from_slice(&e);
        space.check_particles(&all)?;
        if all.len() != space.num_particles() {
            return arg(format!(
                "bipartition {s:?} | {e:?} does not cover all {} particles",
                space.num_particles()
            ));
        }
        Ok(Self { space, s, e })
    }

    /// S = `s`, E = every other particle in ascending order.
    pub fn with_system(space: CompositeSpace, s: Vec<usize>) -> Result<Self> {
        let e = space.complement(&s);
        Self::new(space, s, e)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn s_particles(&self) -> &[usize] {
        &self.s
    }

    pub fn e_particles(&self) -> &[usize] {
        &self.e
    }

    pub fn s_dim(&self) -> usize {
        self.space.dim_of(&self.s)
    }

    pub fn e_dim(&self) -> usize {
        self.space.dim_of(&self.e)
    }

    pub fn s_space(&self) -> CompositeSpace {
        self.space.subspace(&self.s).expect("validated")
    }

    pub fn e_space(&self) -> CompositeSpace {
        self.space.subspace(&self.e).expect("validated")
    }

    /// S particles followed by E particles.
    pub fn order(&self) -> Vec<usize> {
        let mut o = self.s.clone();
        o.extend_from_slice(&self.e);
        o
    }

    /// Same particle sets on each side, ignoring order.
    pub fn same_split(&self, other: &Self) -> bool {
        let sorted = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v
        };
        self.space == other.space && sorted(&self.s) == sorted(&other.s)
    }

    /// Moves one particle across the cut; it is appended to the destination
    /// side's ordering.
    pub fn regroup(&self, particle: usize, direction: Direction) -> Result<Self> {
        let (src, dst) = match direction {
            Direction::SystemToEnvironment => (&self.s, &self.e),
            Direction::EnvironmentToSystem => (&self.e, &self.s),
        };
        if !src.contains(&particle) {
            return arg(format!(
                "particle {particle} is not on the source side of {self}"
            ));
        }
        if src.len() < 2 {
            return arg(format!(
                "moving particle {particle} would empty the source side of {self}"
            ));
        }
        let new_src: Vec<usize> = src.iter().copied().filter(|&p| p != particle).collect();
        let mut new_dst = dst.clone();
        new_dst.push(particle);
        let (s, e) = match direction {
            Direction::SystemToEnvironment => (new_src, new_dst),
            Direction::EnvironmentToSystem => (new_dst, new_src),
        };
        Ok(Self {
            space: self.space.clone(),
            s,
            e,
        })
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{:?}|E{:?}", self.s, self.e)
    }
}

/// A bipartition, possibly of a re-factorized space. `frame` maps native
/// amplitudes to amplitudes in the cut's space; `None` means the cut is on the
/// native particles.
#[derive(Clone, Debug)]
pub struct Structure {
    cut: Bipartition,
    frame: Option<CMatrix>,
}

impl From<Bipartition> for Structure {
    fn from(cut: Bipartition) -> Self {
        Self { cut, frame: None }
    }
}

impl Structure {
    pub fn cut(&self) -> &Bipartition {
        &self.cut
    }

    pub fn frame(&self) -> Option<&CMatrix> {
        self.frame.as_ref()
    }

    pub fn total_dim(&self) -> usize {
        self.cut.space.total_dim()
    }

    /// `U X U^dagger`, or `X` for a native structure.
    pub fn to_frame(&self, op: &CMatrix) -> CMatrix {
        match &self.frame {
            Some(u) => u * op * u.adjoint(),
            None => op.clone(),
        }
    }

    /// `U^dagger X U`, or `X` for a native structure.
    pub fn from_frame(&self, op: &CMatrix) -> CMatrix {
        match &self.frame {
            Some(u) => u.adjoint() * op * u,
            None => op.clone(),
        }
    }

    /// `tr_E` in this structure, S factors in the cut's order.
    pub fn reduce(&self, op: &CMatrix) -> CMatrix {
        let framed = self.to_frame(op);
        partial_trace_operator(&framed, self.cut.space.dims(), &self.cut.s)
    }

    /// `tr_S` in this structure.
    pub fn reduce_environment(&self, op: &CMatrix) -> CMatrix {
        let framed = self.to_frame(op);
        partial_trace_operator(&framed, self.cut.space.dims(), &self.cut.e)
    }

    /// Builds the native operator whose S⊗E form (cut order) is `a ⊗ b`.
    pub fn assemble(&self, a: &CMatrix, b: &CMatrix) -> CMatrix {
        let ordered = kron(a, b);
        let order = self.cut.order();
        let dims: Vec<usize> = order.iter().map(|&p| self.cut.space.dims()[p]).collect();
        let native = permute_operator(&ordered, &dims, &inverse_permutation(&order))
            .expect("cut order is a permutation");
        self.from_frame(&native)
    }

    /// Same split and same frame.
    pub fn same_as(&self, other: &Self) -> bool {
        let frames_equal = match (&self.frame, &other.frame) {
            (None, None) => true,
            (Some(a), Some(b)) => a.shape() == b.shape() && max_abs(&(a - b)) == 0.0,
            _ => false,
        };
        frames_equal && self.cut.same_split(&other.cut)
    }
}

/// A structural transformation of a composite system.
#[derive(Clone, Debug)]
pub enum StructureMap {
    /// Move one particle between S and E.
    Regrouping {
        particle: usize,
        direction: Direction,
    },
    /// Global unitary followed by relabelling as a `new_dims.0 x new_dims.1`
    /// product.
    Unitary {
        u: CMatrix,
        new_dims: (usize, usize),
    },
}

impl StructureMap {
    pub fn regrouping(particle: usize, direction: Direction) -> Self {
        Self::Regrouping {
            particle,
            direction,
        }
    }

    pub fn unitary(u: CMatrix, new_dims: (usize, usize)) -> Result<Self> {
        if !u.is_square() {
            return arg("structure unitary must be square");
        }
        check_dim(u.nrows(), new_dims.0 * new_dims.1)?;
        if new_dims.0 < 2 || new_dims.1 < 2 {
            return arg(format!("new factor dimensions {new_dims:?} must be >= 2"));
        }
        let n = u.nrows();
        let defect = max_abs(&(u.adjoint() * &u - CMatrix::identity(n, n)));
        if defect > UNITARITY_TOL {
            return arg(format!("matrix is not unitary (defect {defect:e})"));
        }
        Ok(Self::Unitary { u, new_dims })
    }

    /// The structure reached from `from`.
    pub fn target(&self, from: &Bipartition) -> Result<Structure> {
        match self {
            Self::Regrouping {
                particle,
                direction,
            } => Ok(Structure::from(from.regroup(*particle, *direction)?)),
            Self::Unitary { u, new_dims } => {
                check_dim(from.space.total_dim(), u.nrows())?;
                let space = CompositeSpace::new(vec![new_dims.0, new_dims.1])?;
                Ok(Structure {
                    cut: Bipartition::new(space, vec![0], vec![1])?,
                    frame: Some(u.clone()),
                })
            }
        }
    }
}

/// States that can be carried through a structure map.
pub trait Refactorable: Sized {
    fn space(&self) -> &CompositeSpace;
    /// Reorders tensor legs; particle `perm[0]` becomes the slowest.
    fn permuted(&self, perm: &[usize]) -> Result<Self>;
    /// Acts with `u` and relabels the result on `space`.
    fn transformed(&self, u: &CMatrix, space: CompositeSpace) -> Result<Self>;
}

impl Refactorable for StateVector {
    fn space(&self) -> &CompositeSpace {
        StateVector::space(self)
    }

    fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let v = permute_vector(self.amplitudes(), self.space().dims(), perm)?;
        let dims = perm.iter().map(|&p| self.space().dims()[p]).collect();
        Ok(StateVector::from_trusted(CompositeSpace::new(dims)?, v))
    }

    fn transformed(&self, u: &CMatrix, space: CompositeSpace) -> Result<Self> {
        check_dim(self.amplitudes().len(), u.ncols())?;
        check_dim(space.total_dim(), u.nrows())?;
        Ok(StateVector::from_trusted(space, u * self.amplitudes()))
    }
}

impl Refactorable for DensityMatrix {
    fn space(&self) -> &CompositeSpace {
        DensityMatrix::space(self)
    }

    fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let m = permute_operator(self.matrix(), self.space().dims(), perm)?;
        let dims = perm.iter().map(|&p| self.space().dims()[p]).collect();
        Ok(DensityMatrix::from_trusted(CompositeSpace::new(dims)?, m))
    }

    fn transformed(&self, u: &CMatrix, space: CompositeSpace) -> Result<Self> {
        check_dim(self.matrix().nrows(), u.ncols())?;
        check_dim(space.total_dim(), u.nrows())?;
        Ok(DensityMatrix::from_trusted(
            space,
            u * self.matrix() * u.adjoint(),
        ))
    }
}

/// Expresses `state` in the factorization reached by `map` from `from`.
///
/// The returned bipartition lives on the returned state's space and always has
/// the form S' = leading particles, E' = trailing particles. For a regrouping
/// the tensor legs are permuted into S'-then-E' order; for a unitary map the
/// state is acted on by `u` and relabelled as a two-factor product.
pub fn apply_structure_map<T: Refactorable>(
    state: &T,
    from: &Bipartition,
    map: &StructureMap,
) -> Result<(T, Bipartition)> {
    if state.space() != from.space() {
        return arg("state and bipartition live on different spaces");
    }
    match map {
        StructureMap::Regrouping {
            particle,
            direction,
        } => {
            let new_cut = from.regroup(*particle, *direction)?;
            let order = new_cut.order();
            let out = state.permuted(&order)?;
            let k = new_cut.s.len();
            let n = order.len();
            let cut = Bipartition::new(out.space().clone(), (0..k).collect(), (k..n).collect())?;
            Ok((out, cut))
        }
        StructureMap::Unitary { u, new_dims } => {
            check_dim(state.space().total_dim(), u.nrows())?;
            let space = CompositeSpace::new(vec![new_dims.0, new_dims.1])?;
            let out = state.transformed(u, space.clone())?;
            Ok((out, Bipartition::new(space, vec![0], vec![1])?))
        }
    }
}

/// Expansion coefficients `D[i][a][m][n]` of the old product basis
/// `|i>_S |a>_E` in the new product basis `|m>_S' |n>_E'`.
///
/// Stored as the unitary matrix with rows indexed by `(m, n)` and columns by
/// `(i, a)`, both lexicographic.
#[derive(Clone, Debug)]
pub struct RefactorCoefficients {
    matrix: CMatrix,
    /// `(d_S, d_E, d_S', d_E')`
    dims: (usize, usize, usize, usize),
}

impl RefactorCoefficients {
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, a: usize, m: usize, n: usize) -> C64 {
        let (_, de, _, dep) = self.dims;
        self.matrix[(m * dep + n, i * de + a)]
    }

    /// New-basis expansion of `|i>_S|a>_E` as a vector over `(m, n)`.
    pub fn column(&self, i: usize, a: usize) -> CVector {
        self.matrix.column(i * self.dims.1 + a).into_owned()
    }

    /// `max |sum_{mn} D^{ia}_{mn} D^{i'a'*}_{mn} - delta delta|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.ncols();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(n, n)))
    }

    /// New-basis amplitudes from old-basis amplitudes (S-then-E order).
    pub fn contract(&self, old: &CVector) -> Result<CVector> {
        check_dim(self.matrix.ncols(), old.len())?;
        Ok(&self.matrix * old)
    }

    /// Coefficients for old-side bases other than the computational one.
    /// Columns of `s_basis` (`e_basis`) are the new S (E) basis vectors in
    /// computational coordinates.
    pub fn in_bases(&self, s_basis: &CMatrix, e_basis: &CMatrix) -> Result<Self> {
        check_dim(self.dims.0, s_basis.nrows())?;
        check_dim(self.dims.1, e_basis.nrows())?;
        check_dim(self.dims.0, s_basis.ncols())?;
        check_dim(self.dims.1, e_basis.ncols())?;
        Ok(Self {
            matrix: &self.matrix * kron(s_basis, e_basis),
            dims: self.dims,
        })
    }
}

/// Matrix of the leg reordering performed by [`permute_vector`].
fn permutation_matrix(dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let n: usize = dims.iter().product();
    let mut out = CMatrix::zeros(n, n);
    for c in 0..n {
        let mut e = CVector::zeros(n);
        e[c] = ONE;
        out.set_column(c, &permute_vector(&e, dims, perm)?);
    }
    Ok(out)
}

/// Coefficient tensor of `map` relative to `old_cut`.
pub fn refactor_coefficients(
    old_cut: &Bipartition,
    map: &StructureMap,
) -> Result<RefactorCoefficients> {
    let space = old_cut.space();
    let n = space.total_dim();
    let old_order = old_cut.order();
    let ordered_dims: Vec<usize> = old_order.iter().map(|&p| space.dims()[p]).collect();
    // native basis vector for each old ordered index (i, a)
    let to_native = permutation_matrix(&ordered_dims, &inverse_permutation(&old_order))?;
    let (matrix, new_dims) = match map {
        StructureMap::Regrouping {
            particle,
            direction,
        } => {
            let new_cut = old_cut.regroup(*particle, *direction)?;
            let to_new = permutation_matrix(space.dims(), &new_cut.order())?;
            (to_new * to_native, (new_cut.s_dim(), new_cut.e_dim()))
        }
        StructureMap::Unitary { u, new_dims } => {
            check_dim(n, u.nrows())?;
            (u * to_native, *new_dims)
        }
    };
    Ok(RefactorCoefficients {
        matrix,
        dims: (old_cut.s_dim(), old_cut.e_dim(), new_dims.0, new_dims.1),
    })
}
