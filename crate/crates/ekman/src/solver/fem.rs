//! Bilinear finite-element stiffness for the axisymmetric vector
//! Laplacian on a mapped node lattice.

use std::f64::consts::PI;

use super::band::SymBand;

/// Node lattice: radial abscissae and σ-levels, with the first and last of
/// each being Dirichlet (zero) nodes.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub rho: Vec<f64>,
    pub sig: Vec<f64>,
    pub phi: Vec<f64>,
    pub radius: f64,
}

impl Lattice {
    pub fn n_unknowns(&self) -> usize {
        (self.rho.len() - 2) * (self.sig.len() - 2)
    }

    /// Unknown index of an interior node.
    #[inline]
    pub fn idx(&self, a: usize, b: usize) -> Option<usize> {
        let (na, nb) = (self.rho.len(), self.sig.len());
        if a == 0 || b == 0 || a == na - 1 || b == nb - 1 {
            None
        } else {
            Some((a - 1) * (nb - 2) + (b - 1))
        }
    }

    fn pos(&self, a: usize, b: usize) -> (f64, f64) {
        (self.radius + self.rho[a], self.sig[b] * self.phi[a])
    }

    /// `∫ (∇u·∇v + c u v / r²)` over the lattice's quadrilaterals, with the
    /// `2π r` axisymmetric weight. `c = 1` for the radial and azimuthal
    /// components, `0` for the vertical one.
    pub fn stiffness(&self, c: f64) -> SymBand {
        let (na, nb) = (self.rho.len(), self.sig.len());
        let mut s = SymBand::zeros(self.n_unknowns(), nb - 1);
        let g = 1.0 / 3f64.sqrt();
        let gauss = [(-g, -g), (g, -g), (g, g), (-g, g)];
        let local = [(0, 0), (1, 0), (1, 1), (0, 1)];
        for a in 0..na - 1 {
            for b in 0..nb - 1 {
                let nodes: Vec<(f64, f64)> = local.iter().map(|&(p, q)| self.pos(a + p, b + q)).collect();
                let ids: Vec<Option<usize>> = local.iter().map(|&(p, q)| self.idx(a + p, b + q)).collect();
                let mut ke = [[0.0; 4]; 4];
                for &(xi, eta) in &gauss {
                    let sx = [-1.0, 1.0, 1.0, -1.0];
                    let sy = [-1.0, -1.0, 1.0, 1.0];
                    let mut n = [0.0; 4];
                    let mut dxi = [0.0; 4];
                    let mut deta = [0.0; 4];
                    for k in 0..4 {
                        n[k] = 0.25 * (1.0 + sx[k] * xi) * (1.0 + sy[k] * eta);
                        dxi[k] = 0.25 * sx[k] * (1.0 + sy[k] * eta);
                        deta[k] = 0.25 * sy[k] * (1.0 + sx[k] * xi);
                    }
                    let (mut r, mut rx, mut re, mut zx, mut ze) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for k in 0..4 {
                        r += n[k] * nodes[k].0;
                        rx += dxi[k] * nodes[k].0;
                        re += deta[k] * nodes[k].0;
                        zx += dxi[k] * nodes[k].1;
                        ze += deta[k] * nodes[k].1;
                    }
                    let det = rx * ze - re * zx;
                    let w = 2.0 * PI * r * det.abs();
                    let mut gr = [0.0; 4];
                    let mut gz = [0.0; 4];
                    for k in 0..4 {
                        gr[k] = (ze * dxi[k] - zx * deta[k]) / det;
                        gz[k] = (-re * dxi[k] + rx * deta[k]) / det;
                    }
                    for p in 0..4 {
                        for q in 0..4 {
                            ke[p][q] += w * (gr[p] * gr[q] + gz[p] * gz[q] + c * n[p] * n[q] / (r * r));
                        }
                    }
                }
                for p in 0..4 {
                    for q in 0..4 {
                        if let (Some(i), Some(j)) = (ids[p], ids[q]) {
                            s.add(i, j, ke[p][q]);
                        }
                    }
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(nr: usize, nz: usize, h: f64) -> Lattice {
        Lattice {
            rho: (0..=nr).map(|i| 1.0 + i as f64 / nr as f64).collect(),
            sig: (0..=nz).map(|j| j as f64 / nz as f64 - 1.0).collect(),
            phi: vec![h; nr + 1],
            radius: 1.0,
        }
    }

    #[test]
    fn dirichlet_energy_of_a_product_mode() {
        // u = sin(π(r-2)) sin(πz) on r ∈ [2,3], z ∈ [-1,0], c = 0
        let (nr, nz) = (80, 80);
        let l = flat(nr, nz, 1.0);
        let s = l.stiffness(0.0);
        let mut u = vec![0.0; l.n_unknowns()];
        for a in 1..nr {
            for b in 1..nz {
                let r = 1.0 + l.rho[a];
                let z = l.sig[b];
                u[l.idx(a, b).unwrap()] = (PI * (r - 2.0)).sin() * (PI * z).sin();
            }
        }
        let e: f64 = s.mul(&u).iter().zip(&u).map(|(a, b)| a * b).sum();
        // ∫∫ π²(cos²(πx)sin²(πz) + sin²(πx)cos²(πz)) 2π r dr dz, r = 2 + x
        let exact = crate::calculus::Rule::uniform(0.0, 1.0, 32, 8).integrate(|x| {
            crate::calculus::Rule::uniform(-1.0, 0.0, 32, 8).integrate(|z| {
                let (cx, sx) = ((PI * x).cos(), (PI * x).sin());
                let (cz, sz) = ((PI * z).cos(), (PI * z).sin());
                PI * PI * (cx * cx * sz * sz + sx * sx * cz * cz) * 2.0 * PI * (2.0 + x)
            })
        });
        assert!((e / exact - 1.0).abs() < 1e-3, "{e} vs {exact}");
    }

    #[test]
    fn stiffness_is_positive_definite() {
        let l = flat(6, 5, 0.7);
        assert!(l.stiffness(1.0).factor().is_ok());
    }

    #[test]
    fn constants_cost_nothing_inside() {
        // a constant field has zero gradient away from the Dirichlet rim
        let l = Lattice {
            rho: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            sig: vec![-1.0, -0.7, -0.4, -0.1, 0.0],
            phi: vec![1.0, 1.2, 1.5, 1.9, 2.0, 2.0],
            radius: 1.0,
        };
        let s = l.stiffness(0.0);
        let u = vec![1.0; l.n_unknowns()];
        let su = s.mul(&u);
        // the centre node (a=2..3, b=2) has no Dirichlet neighbour
        let k = l.idx(2, 2).unwrap();
        assert!(su[k].abs() < 1e-12, "{}", su[k]);
    }
}
