//! Seeded random sampling of points in `Ω_φ`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::Topography;
use crate::profiles::AnsatzParams;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Where in the column a sample lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Height {
    Uniform,
    /// Within a few layer thicknesses of the surface.
    Surface,
    /// Within a few layer thicknesses of the bottom.
    Bottom,
    Top,
    Floor,
}

/// Horizontal position at distance `rho` from the shore, at a random
/// position along it.
pub fn horizontal<R: Rng>(topo: &Topography, rho: f64, rng: &mut R) -> [f64; 2] {
    let w = rng.gen::<f64>() * topo.shore.length();
    topo.shore.point(w, rho)
}

pub fn point<R: Rng>(
    params: &AnsatzParams,
    rho_range: (f64, f64),
    height: Height,
    rng: &mut R,
) -> Result<[f64; 3]> {
    let topo = &params.topo;
    let rho = rho_range.0 + rng.gen::<f64>() * (rho_range.1 - rho_range.0);
    let xh = horizontal(topo, rho, rng);
    let phi = topo.phi(rho)?;
    let e = params.layer();
    let u: f64 = rng.gen();
    let z = match height {
        Height::Uniform => -u * phi,
        Height::Surface => -(u * 8.0 * e).min(phi),
        Height::Bottom => {
            let d = topo.delta(rho)?;
            -phi + (u * 8.0 * d * e).min(phi)
        }
        Height::Top => 0.0,
        Height::Floor => -phi,
    };
    Ok([xh[0], xh[1], z])
}

/// Cycles through uniform, surface-clustered and bottom-clustered heights.
pub fn mixed_points<R: Rng>(
    params: &AnsatzParams,
    rho_range: (f64, f64),
    n: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 3]>> {
    let kinds = [Height::Uniform, Height::Surface, Height::Bottom];
    (0..n)
        .map(|i| point(params, rho_range, kinds[i % 3], rng))
        .collect()
}
