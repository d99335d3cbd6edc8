//! Parameters, basis and the two generators of the atom-cavity system.
//!
//! Basis ordering is `(|100>, |010>, |001>)`: cavity photon, atom `a` excited,
//! atom `b` excited. The ground state `|000>` is absorbing and is carried as a
//! scalar weight on [`StateVector`] instead of a fourth amplitude.

use nalgebra::{Matrix3, RowVector3, Vector3};

use crate::error::{Error, Result};
use crate::C64;

/// Index of `|100>` (photon in the cavity).
pub const CAVITY: usize = 0;
/// Index of `|010>` (atom `a` excited).
pub const ATOM_A: usize = 1;
/// Index of `|001>` (atom `b` excited).
pub const ATOM_B: usize = 2;

/// Relative gap below which two eigenvalues of the conditional generator are
/// treated as coincident and the spectral formula is abandoned.
pub const DEGENERACY_GAP: f64 = 1e-4;

/// Physical inputs in a common rate unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    /// Coupling of atom `a` to the cavity mode.
    pub g_a: f64,
    /// Coupling of atom `b` to the cavity mode.
    pub g_b: f64,
    /// Cavity field (amplitude) decay rate.
    pub kappa: f64,
    /// Atomic amplitude decay rate; populations decay at `2 * gamma`.
    pub gamma: f64,
    /// Photodetector efficiency.
    pub eta: f64,
}

impl Parameters {
    pub fn new(g_a: f64, g_b: f64, kappa: f64, gamma: f64, eta: f64) -> Result<Self> {
        let p = Self {
            g_a,
            g_b,
            kappa,
            gamma,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `g_a = g_b = kappa = 1`, `gamma = 1e-3`, perfect detector.
    pub fn reference() -> Self {
        Self {
            g_a: 1.0,
            g_b: 1.0,
            kappa: 1.0,
            gamma: 1e-3,
            eta: 1.0,
        }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.check_generator_inputs()?;
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                reason: "cavity decay rate must be positive",
            });
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: self.eta,
                reason: "detector efficiency must lie in [0, 1]",
            });
        }
        Ok(())
    }

    /// Checks what the generator needs: finite non-negative rates and at
    /// least one non-zero coupling. `kappa = 0` passes here.
    pub(crate) fn check_generator_inputs(&self) -> Result<()> {
        for (name, value) in [
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "rates must be finite and non-negative",
                });
            }
        }
        if self.coupling_sq() == 0.0 {
            return Err(Error::DegenerateCoupling);
        }
        Ok(())
    }

    /// `g_a^2 + g_b^2`.
    pub fn coupling_sq(&self) -> f64 {
        self.g_a * self.g_a + self.g_b * self.g_b
    }

    /// Sum of all rates, used to scale tolerances.
    pub fn rate_scale(&self) -> f64 {
        self.kappa + self.gamma + self.g_a + self.g_b
    }

    /// `S = sqrt(4(g_a^2 + g_b^2) - (kappa - gamma)^2)`, imaginary when the
    /// bright pair is overdamped.
    pub fn s(&self) -> C64 {
        let d = self.kappa - self.gamma;
        C64::new(4.0 * self.coupling_sq() - d * d, 0.0).sqrt()
    }

    /// True when `4(g_a^2 + g_b^2) < (kappa - gamma)^2`.
    pub fn is_overdamped(&self) -> bool {
        let d = self.kappa - self.gamma;
        4.0 * self.coupling_sq() < d * d
    }
}

/// Amplitudes over `(|100>, |010>, |001>)` plus the absorbed `|000>` weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub amplitudes: Vector3<C64>,
    pub ground_weight: f64,
}

impl StateVector {
    pub fn new(amplitudes: Vector3<C64>) -> Self {
        Self {
            amplitudes,
            ground_weight: 0.0,
        }
    }

    pub fn from_real(a: [f64; 3]) -> Self {
        Self::new(Vector3::new(a[0].into(), a[1].into(), a[2].into()))
    }

    pub fn basis(index: usize) -> Self {
        let mut a = [0.0; 3];
        a[index] = 1.0;
        Self::from_real(a)
    }

    /// Atom `a` excited, atom `b` and cavity empty.
    pub fn initial() -> Self {
        Self::basis(ATOM_A)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn populations(&self) -> [f64; 3] {
        let a = &self.amplitudes;
        [a[0].norm_sqr(), a[1].norm_sqr(), a[2].norm_sqr()]
    }

    /// Unit-norm copy of the amplitudes; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.amplitudes.norm();
        (n > 0.0).then(|| Self::new(self.amplitudes.unscale(n)))
    }
}

/// Normalizes `v` and rotates its global phase so the largest component
/// (first one on ties) is real and positive.
pub fn canonical_phase(v: Vector3<C64>) -> Vector3<C64> {
    let v = v.unscale(v.norm());
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|c| c.norm() >= max * (1.0 - 1e-12))
        .expect("non-empty vector");
    let phase = v[pivot].conj() / v[pivot].norm();
    v * phase
}

/// The lossless coupling matrix `A` with `H_I = (hbar / i) A`.
pub fn interaction_hamiltonian(params: &Parameters) -> Matrix3<f64> {
    let (ga, gb) = (params.g_a, params.g_b);
    Matrix3::new(
        0.0, ga, gb, //
        -ga, 0.0, 0.0, //
        -gb, 0.0, 0.0,
    )
}

/// Closed-form eigensystem of the lossless Hamiltonian `H_I`.
#[derive(Debug, Clone)]
pub struct LosslessEigensystem {
    /// Energies in units of hbar: `0`, `+sqrt(g_a^2+g_b^2)`, `-sqrt(g_a^2+g_b^2)`.
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors, phase-fixed by [`canonical_phase`].
    pub eigenvectors: [Vector3<C64>; 3],
}

impl LosslessEigensystem {
    pub fn dark(&self) -> &Vector3<C64> {
        &self.eigenvectors[0]
    }
}

pub fn lossless_eigensystem(params: &Parameters) -> Result<LosslessEigensystem> {
    params.check_generator_inputs()?;
    let omega = params.coupling_sq().sqrt();
    let bright = |sign: f64| {
        let i = C64::new(0.0, sign / omega);
        canonical_phase(Vector3::new(
            C64::new(1.0, 0.0),
            i * params.g_a,
            i * params.g_b,
        ))
    };
    Ok(LosslessEigensystem {
        eigenvalues: [0.0, omega, -omega],
        eigenvectors: [dark_vector(params), bright(1.0), bright(-1.0)],
    })
}

fn dark_vector(params: &Parameters) -> Vector3<C64> {
    canonical_phase(Vector3::new(
        C64::new(0.0, 0.0),
        C64::new(-params.g_b, 0.0),
        C64::new(params.g_a, 0.0),
    ))
}

/// The real generator `M` of the no-click evolution `exp(-M t)` together with
/// its closed-form spectral data.
#[derive(Debug, Clone)]
pub struct ConditionalGenerator {
    params: Parameters,
    m: Matrix3<f64>,
    s: C64,
    eigenvalues: [C64; 3],
    eigenvectors: [Vector3<C64>; 3],
    reciprocal_basis: Option<[RowVector3<C64>; 3]>,
    dark_state: StateVector,
    near_degenerate: bool,
}

pub fn conditional_generator(params: &Parameters) -> Result<ConditionalGenerator> {
    ConditionalGenerator::new(params)
}

impl ConditionalGenerator {
    pub fn new(params: &Parameters) -> Result<Self> {
        params.check_generator_inputs()?;
        let Parameters {
            g_a,
            g_b,
            kappa,
            gamma,
            ..
        } = *params;
        let m = Matrix3::new(
            kappa, g_a, g_b, //
            -g_a, gamma, 0.0, //
            -g_b, 0.0, gamma,
        );
        let s = params.s();
        let i_s = C64::i() * s;
        let centre = C64::new(0.5 * (kappa + gamma), 0.0);
        let eigenvalues = [C64::new(gamma, 0.0), centre + 0.5 * i_s, centre - 0.5 * i_s];

        // Rows 2 and 3 of (M - lambda) v = 0 fix v = (lambda - gamma, -g_a, -g_b).
        let bright = |lambda: C64| {
            canonical_phase(Vector3::new(
                lambda - gamma,
                C64::new(-g_a, 0.0),
                C64::new(-g_b, 0.0),
            ))
        };
        let dark = dark_vector(params);
        let eigenvectors = [dark, bright(eigenvalues[1]), bright(eigenvalues[2])];

        let gap = min_gap(&eigenvalues);
        let near_degenerate = gap < DEGENERACY_GAP * params.rate_scale();
        let reciprocal_basis = if near_degenerate {
            None
        } else {
            let v = Matrix3::from_columns(&eigenvectors);
            v.try_inverse().map(|inv| {
                [
                    inv.row(0).into_owned(),
                    inv.row(1).into_owned(),
                    inv.row(2).into_owned(),
                ]
            })
        };

        Ok(Self {
            params: *params,
            m,
            s,
            eigenvalues,
            eigenvectors,
            reciprocal_basis,
            dark_state: StateVector::new(dark),
            near_degenerate,
        })
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn m(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn s(&self) -> C64 {
        self.s
    }

    /// `(gamma, (kappa+gamma+iS)/2, (kappa+gamma-iS)/2)`.
    pub fn eigenvalues(&self) -> &[C64; 3] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vector3<C64>; 3] {
        &self.eigenvectors
    }

    /// Rows `<lambda^i|` with `<lambda^i|lambda_j> = delta_ij`. `None` when
    /// the bright pair is (nearly) degenerate and the matrix is defective.
    pub fn reciprocal_basis(&self) -> Option<&[RowVector3<C64>; 3]> {
        self.reciprocal_basis.as_ref()
    }

    pub fn dark_state(&self) -> &StateVector {
        &self.dark_state
    }

    /// Set when the smallest eigenvalue gap is below
    /// `DEGENERACY_GAP * rate_scale`.
    pub fn near_degenerate(&self) -> bool {
        self.near_degenerate
    }

    pub fn min_eigenvalue_gap(&self) -> f64 {
        min_gap(&self.eigenvalues)
    }
}

fn min_gap(l: &[C64; 3]) -> f64 {
    (l[0] - l[1])
        .norm()
        .min((l[0] - l[2]).norm())
        .min((l[1] - l[2]).norm())
}
