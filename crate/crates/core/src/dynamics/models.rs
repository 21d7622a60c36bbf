//! Quantum Brownian motion composites on truncated oscillator bases.
//!
//! Particles are ordered system first (`0..n_s`), then bath oscillators
//! (`n_s..n_s + n_e`). System particle `i` and bath oscillator `a` couple
//! through `(m_i / M) kappa_a x_i x_a`, i.e. the bath sees the centre of mass.
//! System particles interact pairwise through `k_V (x_i - x_j)^2 / 2`, counted
//! once per unordered pair.

use crate::error::{arg, Error, Result};
use crate::hilbert::{
    embed_operator, gibbs_state, CMatrix, CompositeSpace, DensityMatrix, HermitianOperator, C64,
};
use crate::structures::{Bipartition, Structure};

/// Largest composite dimension the model builders accept by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Truncated position and momentum of an oscillator with mass `m` and
/// frequency `omega`, built from the ladder operator on `d` Fock levels.
///
/// `[x, p] = i hbar` holds on all but the top level, where the diagonal entry
/// of `[x, p] / (i hbar)` is `1 - d`.
pub fn position_momentum_ops(
    d: usize,
    m: f64,
    omega: f64,
    hbar: f64,
) -> Result<(HermitianOperator, HermitianOperator)> {
    if d < 2 {
        return arg(format!("Fock cutoff {d} must be at least 2"));
    }
    if !(m > 0.0 && omega > 0.0 && hbar > 0.0) {
        return arg("mass, frequency and hbar must be positive");
    }
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    let x = (&a + &ad) * C64::new((hbar / (2.0 * m * omega)).sqrt(), 0.0);
    let p = (&ad - &a) * C64::new(0.0, (hbar * m * omega / 2.0).sqrt());
    let space = CompositeSpace::new(vec![d])?;
    Ok((
        HermitianOperator::new(space.clone(), x)?,
        HermitianOperator::new(space, p)?,
    ))
}

/// `P x^2 P` and `P p^2 P` for the projector `P` onto the first `d` Fock
/// levels. Squaring the truncated operators instead drops the `a a^dag` part
/// of the top level.
pub fn quadrature_squares(
    d: usize,
    m: f64,
    omega: f64,
    hbar: f64,
) -> Result<(HermitianOperator, HermitianOperator)> {
    let (x, p) = position_momentum_ops(d + 1, m, omega, hbar)?;
    let x2 = (x.matrix() * x.matrix()).view((0, 0), (d, d)).into_owned();
    let p2 = (p.matrix() * p.matrix()).view((0, 0), (d, d)).into_owned();
    let space = CompositeSpace::new(vec![d])?;
    Ok((
        HermitianOperator::from_trusted(space.clone(), crate::hilbert::hermitian_part(&x2)),
        HermitianOperator::from_trusted(space, crate::hilbert::hermitian_part(&p2)),
    ))
}

#[derive(Clone, Debug)]
pub struct QbmModel {
    pub system_masses: Vec<f64>,
    pub bath_masses: Vec<f64>,
    pub bath_frequencies: Vec<f64>,
    /// `kappa_a`, one per bath oscillator.
    pub couplings: Vec<f64>,
    /// `k_V` of the harmonic pair potential.
    pub pair_coupling: f64,
    /// Frequency of an optional harmonic trap on each system particle; 0 for
    /// free particles.
    pub trap_frequency: f64,
    /// Frequency defining the Fock basis of the system particles.
    pub system_basis_frequency: f64,
    pub system_cutoff: usize,
    pub bath_cutoff: usize,
    pub hbar: f64,
    /// System particle handed to the environment in the `S'` grouping.
    pub moved_particle: usize,
    /// Bath oscillator (0-based among the bath) joined to the system in the
    /// `S''` grouping.
    pub absorbed_oscillator: usize,
    pub max_dim: usize,
}

impl Default for QbmModel {
    /// One trapped particle (6 levels) and three oscillators (4 levels each).
    fn default() -> Self {
        Self::uniform(1, 3)
    }
}

impl QbmModel {
    /// Unit masses, bath frequencies `1, 1.3, 1.6, ...`, `kappa = 0.2`,
    /// `k_V = 0.5`, cutoffs 6 (system) and 4 (bath).
    pub fn uniform(n_s: usize, n_e: usize) -> Self {
        Self {
            system_masses: vec![1.0; n_s],
            bath_masses: vec![1.0; n_e],
            bath_frequencies: (0..n_e).map(|a| 1.0 + 0.3 * a as f64).collect(),
            couplings: vec![0.2; n_e],
            pair_coupling: 0.5,
            trap_frequency: 1.0,
            system_basis_frequency: 1.0,
            system_cutoff: 6,
            bath_cutoff: 4,
            hbar: 1.0,
            moved_particle: n_s.saturating_sub(1),
            absorbed_oscillator: 0,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn n_s(&self) -> usize {
        self.system_masses.len()
    }

    pub fn n_e(&self) -> usize {
        self.bath_masses.len()
    }

    /// Same model with every system-bath and pair coupling set to zero.
    pub fn decoupled(&self) -> Self {
        let mut m = self.clone();
        m.couplings.iter_mut().for_each(|k| *k = 0.0);
        m.pair_coupling = 0.0;
        m
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.system_cutoff; self.n_s()];
        d.extend(std::iter::repeat_n(self.bath_cutoff, self.n_e()));
        d
    }

    /// Dimension of the composite, or `None` on overflow.
    pub fn total_dim(&self) -> Option<usize> {
        self.dims().iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
    }

    pub fn validate(&self) -> Result<()> {
        let (ns, ne) = (self.n_s(), self.n_e());
        if ns == 0 || ne == 0 {
            return arg("model needs at least one system particle and one oscillator");
        }
        if self.bath_frequencies.len() != ne || self.couplings.len() != ne {
            return arg("bath masses, frequencies and couplings must have equal length");
        }
        let positive = |v: &[f64]| v.iter().all(|&x| x > 0.0 && x.is_finite());
        if !positive(&self.system_masses) || !positive(&self.bath_masses) {
            return arg("masses must be positive");
        }
        if !positive(&self.bath_frequencies) || !(self.system_basis_frequency > 0.0) {
            return arg("frequencies must be positive");
        }
        if !(self.trap_frequency >= 0.0) || !(self.hbar > 0.0) {
            return arg("trap frequency must be >= 0 and hbar > 0");
        }
        if !self.couplings.iter().chain([&self.pair_coupling]).all(|k| k.is_finite()) {
            return arg("couplings must be finite");
        }
        if self.system_cutoff < 2 || self.bath_cutoff < 2 {
            return arg("Fock cutoffs must be at least 2");
        }
        if self.moved_particle >= ns || self.absorbed_oscillator >= ne {
            return arg("moved particle or absorbed oscillator out of range");
        }
        match self.total_dim() {
            Some(d) if d <= self.max_dim => Ok(()),
            Some(d) => Err(Error::Resource(format!(
                "composite dimension {d} exceeds the ceiling {}",
                self.max_dim
            ))),
            None => Err(Error::Resource("composite dimension overflows".into())),
        }
    }

    pub fn space(&self) -> Result<CompositeSpace> {
        self.validate()?;
        CompositeSpace::new(self.dims())
    }

    /// Native index of bath oscillator `a`.
    pub fn bath_particle(&self, a: usize) -> usize {
        self.n_s() + a
    }

    fn total_mass(&self) -> f64 {
        self.system_masses.iter().sum()
    }

    /// Position and momentum of system particle `i` on its own factor.
    pub fn system_ops(&self, i: usize) -> Result<(HermitianOperator, HermitianOperator)> {
        position_momentum_ops(
            self.system_cutoff,
            self.system_masses[i],
            self.system_basis_frequency,
            self.hbar,
        )
    }

    /// Position and momentum of bath oscillator `a` on its own factor.
    pub fn bath_ops(&self, a: usize) -> Result<(HermitianOperator, HermitianOperator)> {
        position_momentum_ops(
            self.bath_cutoff,
            self.bath_masses[a],
            self.bath_frequencies[a],
            self.hbar,
        )
    }

    /// Projected `x^2` and `p^2` of system particle `i`.
    pub fn system_squares(&self, i: usize) -> Result<(HermitianOperator, HermitianOperator)> {
        quadrature_squares(
            self.system_cutoff,
            self.system_masses[i],
            self.system_basis_frequency,
            self.hbar,
        )
    }

    /// Projected `x^2` and `p^2` of bath oscillator `a`.
    pub fn bath_squares(&self, a: usize) -> Result<(HermitianOperator, HermitianOperator)> {
        quadrature_squares(
            self.bath_cutoff,
            self.bath_masses[a],
            self.bath_frequencies[a],
            self.hbar,
        )
    }

    /// `p^2 / 2m + m w^2 x^2 / 2` of bath oscillator `a` on its own factor;
    /// diagonal `hbar w (n + 1/2)` in the Fock basis.
    pub fn oscillator_hamiltonian(&self, a: usize) -> Result<HermitianOperator> {
        let (x2, p2) = self.bath_squares(a)?;
        let (m, w) = (self.bath_masses[a], self.bath_frequencies[a]);
        let h = p2.matrix() * C64::new(0.5 / m, 0.0) + x2.matrix() * C64::new(0.5 * m * w * w, 0.0);
        Ok(HermitianOperator::from_trusted(x2.space().clone(), h))
    }

    /// `exp(-beta H_a) / Z_a` for bath oscillator `a`.
    pub fn oscillator_thermal_state(&self, a: usize, beta: f64) -> Result<DensityMatrix> {
        if !(beta > 0.0) {
            return arg(format!("inverse temperature {beta} must be positive"));
        }
        gibbs_state(&self.oscillator_hamiltonian(a)?, beta)
    }

    /// Product of all oscillator thermal states, on the bath particles in
    /// native order.
    pub fn bath_thermal_state(&self, beta: f64) -> Result<DensityMatrix> {
        self.thermal_product((0..self.n_e()).collect(), beta)
    }

    /// Thermal product of every oscillator except the absorbed one.
    pub fn remaining_bath_thermal_state(&self, beta: f64) -> Result<DensityMatrix> {
        let alpha = self.absorbed_oscillator;
        self.thermal_product((0..self.n_e()).filter(|&a| a != alpha).collect(), beta)
    }

    fn thermal_product(&self, oscillators: Vec<usize>, beta: f64) -> Result<DensityMatrix> {
        let mut states = oscillators
            .into_iter()
            .map(|a| self.oscillator_thermal_state(a, beta));
        let first = states.next().ok_or_else(|| Error::Argument("no oscillators".into()))??;
        states.try_fold(first, |acc, s| Ok(crate::hilbert::tensor(&acc, &s?)))
    }

    /// Self Hamiltonian of the system particles on the system factor alone.
    pub fn system_hamiltonian(&self) -> Result<HermitianOperator> {
        let n = self.n_s();
        let dims = vec![self.system_cutoff; n];
        let space = CompositeSpace::new(dims.clone())?;
        let mut ops = Embedded::default();
        for i in 0..n {
            ops.push(self.system_ops(i)?, self.system_squares(i)?, &dims, i);
        }
        let terms = Terms {
            model: self,
            ops: &ops,
            dim: space.total_dim(),
        };
        let mut h = CMatrix::zeros(terms.dim, terms.dim);
        for i in 0..n {
            h += terms.single(i);
        }
        for i in 0..n {
            for j in i + 1..n {
                h += terms.pair(i, j);
            }
        }
        Ok(HermitianOperator::from_trusted(space, h))
    }
}

/// One grouping `H = H_S + H_E + H_SE` of the composite Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub cut: Bipartition,
    pub system: CMatrix,
    pub environment: CMatrix,
    pub interaction: CMatrix,
}

impl HamiltonianParts {
    pub fn sum(&self) -> CMatrix {
        &self.system + &self.environment + &self.interaction
    }

    pub fn structure(&self) -> Structure {
        Structure::from(self.cut.clone())
    }
}

/// The composite Hamiltonian and its three groupings.
#[derive(Clone, Debug)]
pub struct QbmHamiltonians {
    pub total: HermitianOperator,
    /// System particles versus bath.
    pub original: HamiltonianParts,
    /// The moved particle handed to the bath; absent for a single particle.
    pub moved: Option<HamiltonianParts>,
    /// The absorbed oscillator joined to the system; absent for a single
    /// oscillator.
    pub absorbed: Option<HamiltonianParts>,
}

/// Single-particle `x`, `x^2` and `p^2` lifted to a composite space.
#[derive(Default)]
struct Embedded {
    x: Vec<CMatrix>,
    x2: Vec<CMatrix>,
    p2: Vec<CMatrix>,
}

impl Embedded {
    fn push(
        &mut self,
        (x, _): (HermitianOperator, HermitianOperator),
        (x2, p2): (HermitianOperator, HermitianOperator),
        dims: &[usize],
        k: usize,
    ) {
        self.x.push(embed_operator(x.matrix(), dims, &[k]));
        self.x2.push(embed_operator(x2.matrix(), dims, &[k]));
        self.p2.push(embed_operator(p2.matrix(), dims, &[k]));
    }
}

/// Term builders over embedded single-particle operators. Index `i` below
/// `n_s` is a system particle, otherwise bath oscillator `i - n_s`.
struct Terms<'a> {
    model: &'a QbmModel,
    ops: &'a Embedded,
    dim: usize,
}

impl Terms<'_> {
    fn scaled(m: CMatrix, s: f64) -> CMatrix {
        m * C64::new(s, 0.0)
    }

    /// Kinetic plus trap energy of system particle `i`.
    fn single(&self, i: usize) -> CMatrix {
        let m = self.model.system_masses[i];
        let w = self.model.trap_frequency;
        let mut h = Self::scaled(self.ops.p2[i].clone(), 0.5 / m);
        if w > 0.0 {
            h += Self::scaled(self.ops.x2[i].clone(), 0.5 * m * w * w);
        }
        h
    }

    fn pair(&self, i: usize, j: usize) -> CMatrix {
        let k = self.model.pair_coupling;
        if k == 0.0 {
            return CMatrix::zeros(self.dim, self.dim);
        }
        let o = self.ops;
        Self::scaled(&o.x2[i] + &o.x2[j], 0.5 * k) - Self::scaled(&o.x[i] * &o.x[j], k)
    }

    fn oscillator(&self, a: usize) -> CMatrix {
        let k = self.model.n_s() + a;
        let (m, w) = (self.model.bath_masses[a], self.model.bath_frequencies[a]);
        Self::scaled(self.ops.p2[k].clone(), 0.5 / m)
            + Self::scaled(self.ops.x2[k].clone(), 0.5 * m * w * w)
    }

    /// `(m_i / M) kappa_a x_i x_a`.
    fn coupling(&self, i: usize, a: usize) -> CMatrix {
        let weight = self.model.system_masses[i] / self.model.total_mass() * self.model.couplings[a];
        Self::scaled(&self.ops.x[i] * &self.ops.x[self.model.n_s() + a], weight)
    }

    fn sum(&self, terms: impl Iterator<Item = CMatrix>) -> CMatrix {
        terms.fold(CMatrix::zeros(self.dim, self.dim), |acc, t| acc + t)
    }
}

/// Builds the composite Hamiltonian and its groupings.
///
/// * original: `H_S` = kinetic, trap and pair terms of the system particles;
///   `H_E` = bath oscillators; `H_SE` = centre-of-mass coupling.
/// * moved: the moved particle's kinetic and trap energy and its share of the
///   bath coupling go to `H_E'`; its pair terms become system-environment
///   interaction.
/// * absorbed: the oscillator's full self energy and its coupling join `H_S''`.
pub fn build_hamiltonians(model: &QbmModel) -> Result<QbmHamiltonians> {
    let space = model.space()?;
    let dims = space.dims().to_vec();
    let (ns, ne) = (model.n_s(), model.n_e());
    let mut ops = Embedded::default();
    for k in 0..ns + ne {
        if k < ns {
            ops.push(model.system_ops(k)?, model.system_squares(k)?, &dims, k);
        } else {
            ops.push(model.bath_ops(k - ns)?, model.bath_squares(k - ns)?, &dims, k);
        }
    }
    let t = Terms {
        model,
        ops: &ops,
        dim: space.total_dim(),
    };
    let pairs = |keep: &dyn Fn(usize, usize) -> bool| {
        t.sum((0..ns).flat_map(|i| (i + 1..ns).map(move |j| (i, j))).filter(|&(i, j)| keep(i, j)).map(|(i, j)| t.pair(i, j)))
    };
    let couplings = |keep: &dyn Fn(usize, usize) -> bool| {
        t.sum((0..ns).flat_map(|i| (0..ne).map(move |a| (i, a))).filter(|&(i, a)| keep(i, a)).map(|(i, a)| t.coupling(i, a)))
    };
    let singles = |keep: &dyn Fn(usize) -> bool| t.sum((0..ns).filter(|&i| keep(i)).map(|i| t.single(i)));
    let oscillators = |keep: &dyn Fn(usize) -> bool| t.sum((0..ne).filter(|&a| keep(a)).map(|a| t.oscillator(a)));

    let system: Vec<usize> = (0..ns).collect();
    let original = HamiltonianParts {
        cut: Bipartition::with_system(space.clone(), system.clone())?,
        system: singles(&|_| true) + pairs(&|_, _| true),
        environment: oscillators(&|_| true),
        interaction: couplings(&|_, _| true),
    };

    let moved = if ns >= 2 {
        let o = model.moved_particle;
        let s: Vec<usize> = system.iter().copied().filter(|&i| i != o).collect();
        Some(HamiltonianParts {
            cut: Bipartition::with_system(space.clone(), s)?,
            system: singles(&|i| i != o) + pairs(&|i, j| i != o && j != o),
            environment: oscillators(&|_| true) + t.single(o) + couplings(&|i, _| i == o),
            interaction: couplings(&|i, _| i != o) + pairs(&|i, j| i == o || j == o),
        })
    } else {
        None
    };

    let absorbed = if ne >= 2 {
        let alpha = model.absorbed_oscillator;
        let mut s = system;
        s.push(model.bath_particle(alpha));
        Some(HamiltonianParts {
            cut: Bipartition::with_system(space.clone(), s)?,
            system: &original.system + t.oscillator(alpha) + couplings(&|_, a| a == alpha),
            environment: oscillators(&|a| a != alpha),
            interaction: couplings(&|_, a| a != alpha),
        })
    } else {
        None
    };

    let total = HermitianOperator::new(space, original.sum())?;
    Ok(QbmHamiltonians {
        total,
        original,
        moved,
        absorbed,
    })
}

/// Initial composite states.
#[derive(Clone, Debug)]
pub enum InitialCondition {
    /// `rho_S ⊗ thermal bath`.
    ThermalBath { rho_s: DensityMatrix },
    /// `sum_m mu_m rho_m ⊗ sigma_m ⊗ thermal bath`, where `rho_m` lives on the
    /// system particles other than the moved one and `sigma_m` on the moved
    /// particle.
    SplitSystemMixture {
        terms: Vec<(f64, DensityMatrix, DensityMatrix)>,
    },
    /// `(rho_S ⊗ thermal absorbed oscillator) ⊗ remaining thermal oscillators`.
    /// In native particle order this is the same operator as `ThermalBath`.
    AbsorbedOscillatorProduct { rho_s: DensityMatrix },
}

fn check_system_state(model: &QbmModel, rho: &DensityMatrix) -> Result<()> {
    let expected = vec![model.system_cutoff; model.n_s()];
    if rho.space().dims() != expected.as_slice() {
        return arg(format!(
            "system state has dims {:?}, expected {expected:?}",
            rho.space().dims()
        ));
    }
    Ok(())
}

pub fn initial_state(
    model: &QbmModel,
    beta: f64,
    condition: &InitialCondition,
) -> Result<DensityMatrix> {
    let space = model.space()?;
    let bath = model.bath_thermal_state(beta)?;
    let rho_s = match condition {
        InitialCondition::ThermalBath { rho_s } => {
            check_system_state(model, rho_s)?;
            rho_s.clone()
        }
        InitialCondition::AbsorbedOscillatorProduct { rho_s } => {
            check_system_state(model, rho_s)?;
            let alpha = model.absorbed_oscillator;
            let rest: Vec<usize> = (0..model.n_e()).filter(|&a| a != alpha).collect();
            let absorbed = crate::hilbert::tensor(rho_s, &model.oscillator_thermal_state(alpha, beta)?);
            let m = if rest.is_empty() {
                absorbed.into_matrix()
            } else {
                let remaining = model.thermal_product(rest, beta)?;
                let full = crate::hilbert::tensor(&absorbed, &remaining);
                // (S, alpha, rest...) -> native order
                let ns = model.n_s();
                let mut order: Vec<usize> = (0..ns).collect();
                order.push(ns + alpha);
                order.extend((0..model.n_e()).filter(|&a| a != alpha).map(|a| ns + a));
                let dims: Vec<usize> = order.iter().map(|&k| space.dims()[k]).collect();
                crate::hilbert::permute_operator(
                    full.matrix(),
                    &dims,
                    &crate::hilbert::inverse_permutation(&order),
                )?
            };
            return Ok(DensityMatrix::from_trusted(space, m));
        }
        InitialCondition::SplitSystemMixture { terms } => {
            if model.n_s() < 2 {
                return arg("a split system mixture needs at least two system particles");
            }
            if terms.is_empty() {
                return arg("mixture needs at least one term");
            }
            let total: f64 = terms.iter().map(|t| t.0).sum();
            if (total - 1.0).abs() > crate::hilbert::VALIDITY_TOL
                || terms.iter().any(|t| !(t.0 >= 0.0))
            {
                return arg(format!("mixture weights must be >= 0 and sum to 1, got {total}"));
            }
            let ns = model.n_s();
            let o = model.moved_particle;
            let s_space = CompositeSpace::new(vec![model.system_cutoff; ns])?;
            let rest: Vec<usize> = (0..ns).filter(|&i| i != o).collect();
            let split = Structure::from(Bipartition::new(s_space.clone(), rest, vec![o])?);
            let mut m = CMatrix::zeros(s_space.total_dim(), s_space.total_dim());
            for (w, rho_rest, rho_moved) in terms {
                if rho_rest.space().dims() != vec![model.system_cutoff; ns - 1].as_slice()
                    || rho_moved.space().dims() != [model.system_cutoff]
                {
                    return arg("mixture term has wrong dims");
                }
                m += split.assemble(rho_rest.matrix(), rho_moved.matrix()) * C64::new(*w, 0.0);
            }
            DensityMatrix::from_trusted(s_space, m)
        }
    };
    let full = crate::hilbert::tensor(&rho_s, &bath);
    Ok(DensityMatrix::from_trusted(space, full.into_matrix()))
}
