use rand::Rng;

use super::gf2::symplectic_product;
use super::pauli::{Bits, PauliOperator};

/// A Clifford unitary `U` stored as the images `U X_q U^dagger`, `U Z_q U^dagger`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clifford {
    x_images: Vec<PauliOperator>,
    z_images: Vec<PauliOperator>,
}

impl Clifford {
    pub fn identity(n: usize) -> Self {
        Clifford {
            x_images: (0..n).map(|q| PauliOperator::single(n, q, 'X')).collect(),
            z_images: (0..n).map(|q| PauliOperator::single(n, q, 'Z')).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.x_images.len()
    }

    pub fn x_image(&self, q: usize) -> &PauliOperator {
        &self.x_images[q]
    }

    pub fn z_image(&self, q: usize) -> &PauliOperator {
        &self.z_images[q]
    }

    /// `U P U^dagger`.
    pub fn conjugate(&self, p: &PauliOperator) -> PauliOperator {
        let n = self.num_qubits();
        let mut out = PauliOperator::identity(n).times_i(p.phase());
        for q in p.x_bits().iter_ones() {
            out = out.mul(&self.x_images[q]);
        }
        for q in p.z_bits().iter_ones() {
            out = out.mul(&self.z_images[q]);
        }
        out
    }

    /// `gate · self`.
    pub fn then(&mut self, gate: &Clifford) -> &mut Self {
        for img in self.x_images.iter_mut().chain(self.z_images.iter_mut()) {
            *img = gate.conjugate(img);
        }
        self
    }

    fn gate(n: usize, edit: impl FnOnce(&mut Clifford)) -> Clifford {
        let mut g = Clifford::identity(n);
        edit(&mut g);
        g
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        let n = self.num_qubits();
        let g = Self::gate(n, |g| std::mem::swap(&mut g.x_images[q], &mut g.z_images[q]));
        self.then(&g)
    }

    pub fn s(&mut self, q: usize) -> &mut Self {
        let n = self.num_qubits();
        let g = Self::gate(n, |g| g.x_images[q] = PauliOperator::single(n, q, 'Y'));
        self.then(&g)
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        let n = self.num_qubits();
        let g = Self::gate(n, |g| g.z_images[q] = g.z_images[q].times_i(2));
        self.then(&g)
    }

    pub fn z(&mut self, q: usize) -> &mut Self {
        let n = self.num_qubits();
        let g = Self::gate(n, |g| g.x_images[q] = g.x_images[q].times_i(2));
        self.then(&g)
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        assert_ne!(control, target);
        let n = self.num_qubits();
        let g = Self::gate(n, |g| {
            g.x_images[control] = g.x_images[control].mul(&PauliOperator::single(n, target, 'X'));
            g.z_images[target] = g.z_images[target].mul(&PauliOperator::single(n, control, 'Z'));
        });
        self.then(&g)
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        assert_ne!(a, b);
        let n = self.num_qubits();
        let g = Self::gate(n, |g| {
            g.x_images[a] = g.x_images[a].mul(&PauliOperator::single(n, b, 'Z'));
            g.x_images[b] = g.x_images[b].mul(&PauliOperator::single(n, a, 'Z'));
        });
        self.then(&g)
    }

    /// Uniformly random Clifford (up to global phase) on `n` qubits.
    ///
    /// The symplectic part is built one hyperbolic pair at a time, each pair
    /// drawn uniformly from the symplectic complement of the previous ones;
    /// the signs are independent fair coins.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        let mut pairs: Vec<(Bits, Bits)> = Vec::with_capacity(n);
        let project = |v: &mut Bits, pairs: &[(Bits, Bits)]| {
            for (a, b) in pairs {
                let wa = symplectic_product(v, b);
                let wb = symplectic_product(v, a);
                if wa == 1 {
                    *v ^= a.as_bitslice();
                }
                if wb == 1 {
                    *v ^= b.as_bitslice();
                }
            }
        };
        let draw = |rng: &mut dyn rand::RngCore| -> Bits {
            (0..2 * n).map(|_| rng.random::<bool>()).collect()
        };
        for _ in 0..n {
            let v = loop {
                let mut v = draw(rng);
                project(&mut v, &pairs);
                if v.any() {
                    break v;
                }
            };
            let w = loop {
                let mut w = draw(rng);
                project(&mut w, &pairs);
                if symplectic_product(&v, &w) == 1 {
                    break w;
                }
            };
            pairs.push((v, w));
        }
        let mut c = Clifford {
            x_images: Vec::with_capacity(n),
            z_images: Vec::with_capacity(n),
        };
        for (v, w) in pairs {
            let sign = |rng: &mut dyn rand::RngCore| if rng.random::<bool>() { 2 } else { 0 };
            c.x_images.push(PauliOperator::from_symplectic(&v).times_i(sign(rng)));
            c.z_images.push(PauliOperator::from_symplectic(&w).times_i(sign(rng)));
        }
        c
    }

    /// Whether the images satisfy the canonical commutation relations.
    pub fn is_valid(&self) -> bool {
        let n = self.num_qubits();
        for i in 0..n {
            for j in 0..n {
                let xx = self.x_images[i].commutes(&self.x_images[j]);
                let zz = self.z_images[i].commutes(&self.z_images[j]);
                let xz = self.x_images[i].commutes(&self.z_images[j]);
                if !xx || !zz || xz == (i == j) {
                    return false;
                }
            }
        }
        self.x_images
            .iter()
            .chain(&self.z_images)
            .all(|p| p.is_hermitian())
    }
}
