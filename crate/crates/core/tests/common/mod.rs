//! Full Hilbert-space reference built from Pauli tensor products.
//!
//! Site 1 is the most significant tensor factor; the local basis is
//! `[down, up]`. Nothing here touches the sector machinery.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Op = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn local(which: char) -> Op {
    let z = c(0.0);
    let i = Complex64::new(0.0, 1.0);
    match which {
        'x' => DMatrix::from_row_slice(2, 2, &[z, c(0.5), c(0.5), z]),
        'y' => DMatrix::from_row_slice(2, 2, &[z, i * 0.5, -i * 0.5, z]),
        'z' => DMatrix::from_row_slice(2, 2, &[c(-0.5), z, z, c(0.5)]),
        _ => unreachable!(),
    }
}

/// `S^which` acting on `site` (1-based) of an `n`-site chain.
pub fn spin(n: usize, site: usize, which: char) -> Op {
    let mut op = DMatrix::from_element(1, 1, c(1.0));
    for s in 1..=n {
        let factor = if s == site { local(which) } else { DMatrix::identity(2, 2) };
        op = op.kronecker(&factor);
    }
    op
}

pub fn dot(n: usize, i: usize, j: usize) -> Op {
    "xyz".chars().map(|a| spin(n, i, a) * spin(n, j, a)).fold(Op::zeros(1 << n, 1 << n), |acc, t| acc + t)
}

/// `(S_i × S_j)^z`.
pub fn cross_z(n: usize, i: usize, j: usize) -> Op {
    spin(n, i, 'x') * spin(n, j, 'y') - spin(n, i, 'y') * spin(n, j, 'x')
}

pub fn total_sz(n: usize) -> Op {
    (1..=n).fold(Op::zeros(1 << n, 1 << n), |acc, s| acc + spin(n, s, 'z'))
}

/// Chain Hamiltonian with per-bond couplings.
pub fn hamiltonian(j1: &[f64], j2: &[f64], dm: f64, b: f64) -> Op {
    let n = j1.len() + 1;
    let mut h = Op::zeros(1 << n, 1 << n);
    for (i, &j) in j1.iter().enumerate() {
        h -= dot(n, i + 1, i + 2) * c(j);
        h += cross_z(n, i + 1, i + 2) * c(dm);
    }
    for (i, &j) in j2.iter().enumerate() {
        h -= dot(n, i + 1, i + 3) * c(j);
    }
    h + total_sz(n) * c(b)
}

/// `exp(-i H t)` by the library's matrix exponential.
pub fn propagate(h: &Op, t: f64) -> Op {
    (h * Complex64::new(0.0, -t)).exp()
}

/// Full-space index of the configuration with `up` sites raised.
pub fn index_of(n: usize, up: &[usize]) -> usize {
    up.iter().map(|&s| 1usize << (n - s)).sum()
}

/// `⟨ψ|ρ_{sites}|ψ⟩` of the reduced state on `sites` of a full state,
/// with `sites[0]` the most significant local qubit.
pub fn reduced_overlap(n: usize, state: &[Complex64], sites: &[usize], target: &[Complex64]) -> f64 {
    let k = sites.len();
    let dim = 1usize << k;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    let others: Vec<usize> = (1..=n).filter(|s| !sites.contains(s)).collect();
    for env in 0..(1usize << others.len()) {
        let mut block = vec![c(0.0); dim];
        for (local_idx, slot) in block.iter_mut().enumerate() {
            let mut idx = 0usize;
            for (p, &s) in sites.iter().enumerate() {
                if (local_idx >> (k - 1 - p)) & 1 == 1 {
                    idx |= 1 << (n - s);
                }
            }
            for (p, &s) in others.iter().enumerate() {
                if (env >> p) & 1 == 1 {
                    idx |= 1 << (n - s);
                }
            }
            *slot = state[idx];
        }
        for a in 0..dim {
            for b in 0..dim {
                rho[(a, b)] += block[a] * block[b].conj();
            }
        }
    }
    let v = nalgebra::DVector::from_column_slice(target);
    (v.adjoint() * rho * v)[(0, 0)].re
}

/// Evolution protocol shared by the library and the reference.
#[derive(Debug, Clone, Copy)]
pub enum Protocol {
    Continuous { t: f64 },
    Kicked { tau: f64, e1: f64, m: usize },
}

/// Random chain: per-bond couplings, chirality field and magnetic field.
#[derive(Debug, Clone)]
pub struct RandomChain {
    pub j1: Vec<f64>,
    pub j2: Vec<f64>,
    pub e0: f64,
    pub b: f64,
}

impl RandomChain {
    pub fn draw<R: rand::Rng>(n: usize, rng: &mut R) -> Self {
        Self {
            j1: (0..n - 1).map(|_| rng.random_range(-2.0..2.0)).collect(),
            j2: (0..n.saturating_sub(2)).map(|_| rng.random_range(-2.0..2.0)).collect(),
            e0: rng.random_range(-1.0..1.0),
            b: rng.random_range(-1.0..1.0),
        }
    }

    pub fn n(&self) -> usize {
        self.j1.len() + 1
    }

    pub fn params(&self) -> kickchain::ChainParams64 {
        let profile = kickchain::CouplingProfile::from_bonds(self.n(), self.j1.clone(), self.j2.clone()).unwrap();
        kickchain::ChainParams::new(profile, self.e0, self.b)
    }

    pub fn full_hamiltonian(&self) -> Op {
        hamiltonian(&self.j1, &self.j2, self.e0, self.b)
    }

    /// Reference propagator over the full space.
    pub fn full_unitary(&self, protocol: Protocol) -> Op {
        match protocol {
            Protocol::Continuous { t } => propagate(&self.full_hamiltonian(), t),
            Protocol::Kicked { tau, e1, m } => {
                let n = self.n();
                let chirality = hamiltonian(&vec![0.0; n - 1], &vec![0.0; n.saturating_sub(2)], 1.0, 0.0);
                let step = propagate(&chirality, e1) * propagate(&self.full_hamiltonian(), tau);
                (0..m).fold(Op::identity(1 << n, 1 << n), |acc, _| &step * acc)
            }
        }
    }

    /// Largest `|⟨b|U|a⟩_sector − ⟨b|U|a⟩_full|` over sectors k = 0, 1, 2.
    pub fn sector_deviation(&self, protocol: Protocol) -> f64 {
        use kickchain::propagator::{evolve_kicked, kick_step, unitary_exp};
        let n = self.n();
        let full = self.full_unitary(protocol);
        let params = self.params();
        let mut worst: f64 = 0.0;
        for k in 0..=2.min(n) {
            let basis = kickchain::ExcitationBasis::new(n, k).unwrap();
            let columns: Vec<Vec<Complex64>> = match protocol {
                Protocol::Continuous { t } => {
                    let h = kickchain::build_hamiltonian(&params, &basis).unwrap();
                    let u = unitary_exp(&h, t, &basis).unwrap();
                    (0..basis.dim()).map(|j| u.matrix.column(j)).collect()
                }
                Protocol::Kicked { tau, e1, m } => {
                    let schedule = kickchain::KickSchedule::new(tau, self.e0, e1, m).unwrap();
                    let step = kick_step(&params, &schedule, &basis).unwrap();
                    basis
                        .configs()
                        .iter()
                        .map(|&cfg| {
                            let psi0 = kickchain::StateVector::basis_state(&basis, cfg).unwrap();
                            evolve_kicked(&step, m, &psi0).unwrap().amplitudes
                        })
                        .collect()
                }
            };
            for (j, source) in basis.configs().iter().enumerate() {
                for (i, target) in basis.configs().iter().enumerate() {
                    let reference = full[(index_of(n, &target.sites()), index_of(n, &source.sites()))];
                    worst = worst.max((columns[j][i] - reference).norm());
                }
            }
        }
        worst
    }
}
