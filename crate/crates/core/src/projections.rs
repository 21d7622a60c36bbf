//! Projection superoperators onto the "relevant part" of a composite state,
//! and residuals that measure how projections adapted to different splits
//! disagree.
//!
//! Three families are supported, all for a fixed [`Structure`]:
//!
//! * reference: `P rho = (tr_E rho) ⊗ rho_E` for a fixed environment state;
//! * conditional: `P rho = sum_n P_Sn (tr_E rho) P_Sn ⊗ rho_En`;
//! * environment projectors: `P rho = sum_i tr_E[(1 ⊗ P_Ei) rho] ⊗ P_Ei / tr P_Ei`.
//!
//! Every family is linear, idempotent and trace preserving and maps density
//! matrices to density matrices. Only the reference family satisfies
//! `tr_E Q rho = 0` for every `rho`.

use crate::error::{arg, check_dim, Error, Result};
use crate::hilbert::{
    eigh, frobenius_norm, hermiticity_defect, kron, max_abs, partial_trace_operator,
    permute_operator, trace_norm, CMatrix, CVector, DensityMatrix, HermitianOperator,
    StateVector, C64,
};
use crate::structures::{Bipartition, RefactorCoefficients, Structure};

/// Residuals above this count as a violation of the compatibility condition.
pub const RESIDUAL_THRESHOLD: f64 = 1e-6;

const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum SchemeKind {
    Reference {
        rho_e: DensityMatrix,
    },
    Conditional {
        /// `(P_Sn, rho_En)` pairs.
        branches: Vec<(CMatrix, DensityMatrix)>,
    },
    EnvironmentProjectors {
        projectors: Vec<CMatrix>,
    },
}

#[derive(Clone, Debug)]
pub struct ProjectionScheme {
    structure: Structure,
    kind: SchemeKind,
}

fn check_projector(p: &CMatrix, dim: usize, what: &str) -> Result<()> {
    check_dim(dim, p.nrows())?;
    check_dim(dim, p.ncols())?;
    if hermiticity_defect(p) > PROJECTOR_TOL || max_abs(&(p * p - p)) > PROJECTOR_TOL {
        return arg(format!("{what} is not an orthogonal projector"));
    }
    if p.trace().re < 0.5 {
        return arg(format!("{what} is the zero projector"));
    }
    Ok(())
}

fn check_resolution(ps: &[&CMatrix], dim: usize, what: &str) -> Result<()> {
    let mut sum = CMatrix::zeros(dim, dim);
    for p in ps {
        sum += *p;
    }
    if max_abs(&(sum - CMatrix::identity(dim, dim))) > PROJECTOR_TOL {
        return arg(format!("{what} do not sum to the identity"));
    }
    Ok(())
}

impl ProjectionScheme {
    /// `P rho = (tr_E rho) ⊗ rho_e`.
    ///
    /// `rho_e` must not be built from the state the scheme is applied to
    /// (e.g. as `tr_S rho`), otherwise the map is not linear.
    pub fn reference(structure: impl Into<Structure>, rho_e: DensityMatrix) -> Result<Self> {
        let structure = structure.into();
        if rho_e.space().dims() != structure.cut().e_space().dims() {
            return arg(format!(
                "reference state on {:?} but environment has dims {:?}",
                rho_e.space().dims(),
                structure.cut().e_space().dims()
            ));
        }
        Ok(Self {
            structure,
            kind: SchemeKind::Reference { rho_e },
        })
    }

    /// Reference scheme with the maximally mixed environment state.
    pub fn maximally_mixed(structure: impl Into<Structure>) -> Self {
        let structure = structure.into();
        let rho_e = DensityMatrix::maximally_mixed(structure.cut().e_space());
        Self {
            structure,
            kind: SchemeKind::Reference { rho_e },
        }
    }

    /// `P rho = sum_n P_Sn (tr_E rho) P_Sn ⊗ rho_En`, with `sum_n P_Sn = 1`
    /// and mutually orthogonal supports of the `rho_En`.
    pub fn conditional(
        structure: impl Into<Structure>,
        branches: Vec<(CMatrix, DensityMatrix)>,
    ) -> Result<Self> {
        let structure = structure.into();
        let cut = structure.cut();
        let (ds, e_dims) = (cut.s_dim(), cut.e_space());
        if branches.is_empty() {
            return arg("conditional scheme needs at least one branch");
        }
        for (k, (p, rho)) in branches.iter().enumerate() {
            check_projector(p, ds, &format!("P_S{k}"))?;
            if rho.space().dims() != e_dims.dims() {
                return arg(format!("environment state {k} has wrong dims"));
            }
        }
        check_resolution(
            &branches.iter().map(|(p, _)| p).collect::<Vec<_>>(),
            ds,
            "system projectors",
        )?;
        for a in 0..branches.len() {
            for b in a + 1..branches.len() {
                let overlap = (branches[a].1.matrix() * branches[b].1.matrix()).trace().norm();
                if overlap > PROJECTOR_TOL {
                    return arg(format!(
                        "environment states {a} and {b} have overlapping supports"
                    ));
                }
            }
        }
        Ok(Self {
            structure,
            kind: SchemeKind::Conditional { branches },
        })
    }

    /// `P rho = sum_i tr_E[(1 ⊗ P_Ei) rho] ⊗ P_Ei / tr P_Ei` for an orthogonal
    /// resolution of the identity on E.
    pub fn environment_projectors(
        structure: impl Into<Structure>,
        projectors: Vec<CMatrix>,
    ) -> Result<Self> {
        let structure = structure.into();
        let de = structure.cut().e_dim();
        if projectors.is_empty() {
            return arg("need at least one environment projector");
        }
        for (k, p) in projectors.iter().enumerate() {
            check_projector(p, de, &format!("P_E{k}"))?;
        }
        for a in 0..projectors.len() {
            for b in a + 1..projectors.len() {
                if max_abs(&(&projectors[a] * &projectors[b])) > PROJECTOR_TOL {
                    return arg(format!("projectors {a} and {b} are not orthogonal"));
                }
            }
        }
        check_resolution(&projectors.iter().collect::<Vec<_>>(), de, "environment projectors")?;
        Ok(Self {
            structure,
            kind: SchemeKind::EnvironmentProjectors { projectors },
        })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn cut(&self) -> &Bipartition {
        self.structure.cut()
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    /// Environment reference state of a reference scheme.
    pub fn reference_state(&self) -> Option<&DensityMatrix> {
        match &self.kind {
            SchemeKind::Reference { rho_e } => Some(rho_e),
            _ => None,
        }
    }

    fn native_dim(&self) -> usize {
        match self.structure.frame() {
            Some(u) => u.ncols(),
            None => self.structure.total_dim(),
        }
    }

    /// The superoperator applied to an arbitrary operator on the native space.
    pub fn apply(&self, op: &CMatrix) -> Result<CMatrix> {
        check_dim(self.native_dim(), op.nrows())?;
        check_dim(self.native_dim(), op.ncols())?;
        let s = &self.structure;
        match &self.kind {
            SchemeKind::Reference { rho_e } => Ok(s.assemble(&s.reduce(op), rho_e.matrix())),
            SchemeKind::Conditional { branches } => {
                let reduced = s.reduce(op);
                let ds = reduced.nrows();
                let de = s.cut().e_dim();
                let mut ordered = CMatrix::zeros(ds * de, ds * de);
                for (p, rho) in branches {
                    ordered += kron(&(p * &reduced * p), rho.matrix());
                }
                Ok(assemble_ordered(s, &ordered))
            }
            SchemeKind::EnvironmentProjectors { projectors } => {
                let cut = s.cut();
                let order = cut.order();
                let dims: Vec<usize> = order.iter().map(|&p| cut.space().dims()[p]).collect();
                let framed = permute_operator(&s.to_frame(op), cut.space().dims(), &order)?;
                let ds = cut.s_dim();
                let keep: Vec<usize> = (0..cut.s_particles().len()).collect();
                let id_s = CMatrix::identity(ds, ds);
                let n = framed.nrows();
                let mut ordered = CMatrix::zeros(n, n);
                for p in projectors {
                    let weighted = kron(&id_s, p) * &framed;
                    let reduced = partial_trace_operator(&weighted, &dims, &keep);
                    let rank = p.trace().re;
                    ordered += kron(&reduced, &(p / C64::new(rank, 0.0)));
                }
                Ok(assemble_ordered(s, &ordered))
            }
        }
    }

    fn check_state(&self, rho: &DensityMatrix) -> Result<()> {
        if self.structure.frame().is_none() && rho.space() != self.cut().space() {
            return arg("state and projection scheme live on different spaces");
        }
        check_dim(self.native_dim(), rho.space().total_dim())
    }
}

/// Native operator from one written in S-then-E order of `s`'s cut.
fn assemble_ordered(s: &Structure, ordered: &CMatrix) -> CMatrix {
    let cut = s.cut();
    let order = cut.order();
    let dims: Vec<usize> = order.iter().map(|&p| cut.space().dims()[p]).collect();
    let inv = crate::hilbert::inverse_permutation(&order);
    let native = permute_operator(ordered, &dims, &inv).expect("cut order is a permutation");
    s.from_frame(&native)
}

/// The relevant part `P rho`.
pub fn project(rho: &DensityMatrix, scheme: &ProjectionScheme) -> Result<DensityMatrix> {
    scheme.check_state(rho)?;
    let m = scheme.apply(rho.matrix())?;
    Ok(DensityMatrix::from_trusted(rho.space().clone(), m))
}

/// The irrelevant part `Q rho = rho - P rho`: traceless and Hermitian.
pub fn irrelevant_part(rho: &DensityMatrix, scheme: &ProjectionScheme) -> Result<HermitianOperator> {
    scheme.check_state(rho)?;
    let q = rho.matrix() - scheme.apply(rho.matrix())?;
    Ok(HermitianOperator::from_trusted(rho.space().clone(), q))
}

/// How strongly one structure's irrelevant part leaks into another
/// structure's open system.
#[derive(Clone, Debug)]
pub struct LeakageReport {
    /// Trace norm of the leaked operator.
    pub residual: f64,
    /// Frobenius norm, for diagnostics.
    pub frobenius: f64,
    /// Threshold separating zero from nonzero residuals.
    pub tolerance: f64,
    pub scheme_cut: String,
    pub alt_cut: String,
    pub state_id: Option<String>,
}

impl LeakageReport {
    pub fn with_state_id(mut self, id: impl Into<String>) -> Self {
        self.state_id = Some(id.into());
        self
    }

    pub fn exceeds_tolerance(&self) -> bool {
        self.residual > self.tolerance
    }
}

fn describe(s: &Structure) -> String {
    match s.frame() {
        Some(_) => format!("U·{}", s.cut()),
        None => s.cut().to_string(),
    }
}

fn check_alt(rho: &DensityMatrix, alt: &Structure) -> Result<()> {
    let native = alt.frame().map_or(alt.total_dim(), |u| u.ncols());
    check_dim(native, rho.space().total_dim())?;
    if alt.frame().is_none() && alt.cut().space() != rho.space() {
        return arg("alternative structure lives on a different space");
    }
    Ok(())
}

/// `|| tr_E' Q rho ||_1`, where `Q` belongs to `scheme` and `E'` is the
/// environment of `alt`.
///
/// Zero exactly when the scheme's irrelevant part carries no information
/// about the alternative open system. Comparing a structure with itself is
/// rejected, since then the residual vanishes identically for reference
/// schemes.
pub fn leakage_residual(
    rho: &DensityMatrix,
    scheme: &ProjectionScheme,
    alt: &Structure,
) -> Result<LeakageReport> {
    scheme.check_state(rho)?;
    check_alt(rho, alt)?;
    if alt.same_as(scheme.structure()) {
        return Err(Error::Degenerate(format!(
            "alternative structure {} equals the scheme's own",
            describe(alt)
        )));
    }
    let q = rho.matrix() - scheme.apply(rho.matrix())?;
    let leaked = alt.reduce(&q);
    Ok(LeakageReport {
        residual: trace_norm(&leaked),
        frobenius: frobenius_norm(&leaked),
        tolerance: RESIDUAL_THRESHOLD,
        scheme_cut: describe(scheme.structure()),
        alt_cut: describe(alt),
        state_id: None,
    })
}

/// `P P' rho - P' P rho`.
pub fn projection_commutator(
    rho: &DensityMatrix,
    scheme: &ProjectionScheme,
    scheme_alt: &ProjectionScheme,
) -> Result<CMatrix> {
    scheme.check_state(rho)?;
    scheme_alt.check_state(rho)?;
    let m = rho.matrix();
    let p_after_alt = scheme.apply(&scheme_alt.apply(m)?)?;
    let alt_after_p = scheme_alt.apply(&scheme.apply(m)?)?;
    Ok(p_after_alt - alt_after_p)
}

/// `|| [P, P'] rho ||_1`.
///
/// Unlike [`leakage_residual`], two schemes on the same split are accepted:
/// identical schemes give zero, different references on one split do not
/// commute.
pub fn commutation_residual(
    rho: &DensityMatrix,
    scheme: &ProjectionScheme,
    scheme_alt: &ProjectionScheme,
) -> Result<f64> {
    Ok(trace_norm(&projection_commutator(rho, scheme, scheme_alt)?))
}

fn reference_parts<'a>(
    scheme: &'a ProjectionScheme,
    coeffs: &RefactorCoefficients,
) -> Result<&'a DensityMatrix> {
    let rho_e = scheme
        .reference_state()
        .ok_or_else(|| Error::Argument("coefficient conditions need a reference scheme".into()))?;
    if scheme.structure().frame().is_some() {
        return arg("coefficient conditions need a scheme on the native particles");
    }
    let (ds, de, _, _) = coeffs.dims();
    if ds != scheme.cut().s_dim() || de != scheme.cut().e_dim() {
        return arg(format!(
            "coefficients map a {ds}x{de} split but the scheme's cut is {}x{}",
            scheme.cut().s_dim(),
            scheme.cut().e_dim()
        ));
    }
    Ok(rho_e)
}

/// `sum_b v[a, b] v[a', b]^*` for `v` laid out as `(a, b)` with `b` fastest.
fn half_trace_outer(v: &CVector, ds: usize, de: usize) -> CMatrix {
    let m = CMatrix::from_fn(ds, de, |a, b| v[a * de + b]);
    &m * m.adjoint()
}

/// Coefficient-level form of `tr_E' Q |psi><psi|` for a reference scheme.
///
/// Expands `psi` in the eigenbases of its S reduction (`p_i`) and of the
/// reference state (`pi_a`), pushes both through the re-factorization
/// coefficients `D`, and returns
/// `A[m][m'] = sum_n (L[m][n] L[m'][n]^* - sum_{i,a} p_i pi_a D^{ia}_{mn} D^{ia*}_{m'n})`
/// with `L[m][n] = sum_{i,a} c_i C_{ia} D^{ia}_{mn}`. The diagonal sums to
/// zero since `Q` is traceless.
pub fn pure_state_condition_matrix(
    psi: &StateVector,
    scheme: &ProjectionScheme,
    coeffs: &RefactorCoefficients,
) -> Result<CMatrix> {
    let rho_e = reference_parts(scheme, coeffs)?;
    let cut = scheme.cut();
    if psi.space() != cut.space() {
        return arg("state and scheme live on different spaces");
    }
    let (ds, de, dsp, dep) = coeffs.dims();
    let ordered = crate::hilbert::permute_vector(psi.amplitudes(), cut.space().dims(), &cut.order())?;
    let rho_s = half_trace_outer(&ordered, ds, de);
    let (p, s_basis) = eigh(&rho_s);
    let (pi, e_basis) = eigh(rho_e.matrix());
    let adapted = coeffs.in_bases(&s_basis, &e_basis)?;
    // c_i C_{ia} = <i, a|psi>
    let amplitudes = kron(&s_basis, &e_basis).adjoint() * &ordered;
    let lambda = adapted.matrix() * &amplitudes;
    let mut a = half_trace_outer(&lambda, dsp, dep);
    for i in 0..ds {
        for al in 0..de {
            let w = p[i] * pi[al];
            if w == 0.0 {
                continue;
            }
            a -= half_trace_outer(&adapted.column(i, al), dsp, dep) * C64::new(w, 0.0);
        }
    }
    Ok(a)
}

/// One term `weight * rho_s ⊗ rho_e` of a separable state.
#[derive(Clone, Debug)]
pub struct SeparableTerm {
    pub weight: f64,
    pub rho_s: DensityMatrix,
    pub rho_e: DensityMatrix,
}

/// `rho = sum_i w_i rho_Si ⊗ rho_Ei` across a fixed cut.
#[derive(Clone, Debug)]
pub struct SeparableDecomposition {
    cut: Bipartition,
    terms: Vec<SeparableTerm>,
}

impl SeparableDecomposition {
    pub fn new(cut: Bipartition, terms: Vec<SeparableTerm>) -> Result<Self> {
        if terms.is_empty() {
            return arg("separable decomposition needs at least one term");
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if (total - 1.0).abs() > crate::hilbert::VALIDITY_TOL {
            return arg(format!("weights sum to {total}, not 1"));
        }
        let (s_space, e_space) = (cut.s_space(), cut.e_space());
        for (k, t) in terms.iter().enumerate() {
            if !(t.weight >= 0.0) {
                return arg(format!("weight {k} is negative"));
            }
            if t.rho_s.space().dims() != s_space.dims() || t.rho_e.space().dims() != e_space.dims() {
                return arg(format!("term {k} does not match the cut's factors"));
            }
        }
        Ok(Self { cut, terms })
    }

    pub fn cut(&self) -> &Bipartition {
        &self.cut
    }

    pub fn terms(&self) -> &[SeparableTerm] {
        &self.terms
    }

    /// The represented state on the native space.
    pub fn density(&self) -> DensityMatrix {
        let s = Structure::from(self.cut.clone());
        let n = self.cut.space().total_dim();
        let mut m = CMatrix::zeros(n, n);
        for t in &self.terms {
            m += s.assemble(t.rho_s.matrix(), t.rho_e.matrix()) * C64::new(t.weight, 0.0);
        }
        DensityMatrix::from_trusted(self.cut.space().clone(), m)
    }

    /// `tr_E rho = sum_i w_i rho_Si`.
    pub fn system_marginal(&self) -> CMatrix {
        let ds = self.cut.s_dim();
        self.terms
            .iter()
            .fold(CMatrix::zeros(ds, ds), |acc, t| {
                acc + t.rho_s.matrix() * C64::new(t.weight, 0.0)
            })
    }
}

/// Coefficient-level form of `tr_E' Q rho` for a separable `rho` and a
/// reference scheme:
/// `L[a][a'] = sum_{i,m,n,b} w_i p_im pi_in C^{imn}_{ab} C^{imn*}_{a'b}
///            - sum_{p,q,b} k_p o_q D^{pq}_{ab} D^{pq*}_{a'b}`,
/// with each term's factors and the pair (`tr_E rho`, reference state)
/// expanded in their eigenbases. The diagonal sums to zero.
pub fn separable_condition_matrix(
    decomposition: &SeparableDecomposition,
    scheme: &ProjectionScheme,
    coeffs: &RefactorCoefficients,
) -> Result<CMatrix> {
    let rho_ref = reference_parts(scheme, coeffs)?;
    if decomposition.cut() != scheme.cut() {
        return arg("decomposition and scheme use different cuts");
    }
    let (_, _, dsp, dep) = coeffs.dims();
    let mut lambda = CMatrix::zeros(dsp, dsp);
    for t in decomposition.terms() {
        let (p, chi) = eigh(t.rho_s.matrix());
        let (pi, phi) = eigh(t.rho_e.matrix());
        let c = coeffs.in_bases(&chi, &phi)?;
        for (m, &pm) in p.iter().enumerate() {
            for (n, &pn) in pi.iter().enumerate() {
                let w = t.weight * pm * pn;
                lambda += half_trace_outer(&c.column(m, n), dsp, dep) * C64::new(w, 0.0);
            }
        }
    }
    let (kappa, varphi) = eigh(&decomposition.system_marginal());
    let (omega, psi) = eigh(rho_ref.matrix());
    let d = coeffs.in_bases(&varphi, &psi)?;
    for (p, &kp) in kappa.iter().enumerate() {
        for (q, &oq) in omega.iter().enumerate() {
            lambda -= half_trace_outer(&d.column(p, q), dsp, dep) * C64::new(kp * oq, 0.0);
        }
    }
    Ok(lambda)
}
