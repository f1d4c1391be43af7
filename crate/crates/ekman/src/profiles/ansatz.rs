//! The approximate solution `U_app,ε`, `P_app,ε` and the limit profile ū.
//!
//! Every term is linear in the cut-off amplitude `u = u^θ_ε(t, ρ)`, so the
//! time derivative of any term is the same term evaluated with `∂_t u = -λ_φ u`
//! in place of `u`.

use serde::{Deserialize, Serialize};

use super::cutoff::{chi, chi_prime, CutoffK};
use super::data::InitialSwirl;
use crate::calculus::quadrature::Rule;
use crate::calculus::scalar::{Scalar, Series};
use crate::error::{Error, Result};
use crate::geometry::{RadialSeries, ShoreFrame, Topography};

/// Deliberate corruptions used as negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    /// Flips the sign of the vertical order-1 surface correction.
    SignFlip,
    /// Takes the surface order-1 cut-off in the bottom variable `(z+φ)/ε^{1-a}`.
    CutoffVariable,
}

impl std::str::FromStr for Mutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Mutation::None),
            "sign_flip" | "sign-flip" => Ok(Mutation::SignFlip),
            "cutoff_variable" | "cutoff-variable" => Ok(Mutation::CutoffVariable),
            _ => Err(Error::Config(format!("unknown mutation '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnsatzParams {
    pub topo: Topography,
    pub eps: f64,
    pub a: f64,
    pub data: InitialSwirl,
    /// The shore cut-off is `χ(φ / (κ ε^{1-a}))`; `κ = 1` is the bare form.
    pub shore_factor: f64,
    pub mutation: Mutation,
}

impl AnsatzParams {
    pub fn new(topo: Topography, eps: f64, a: f64, data: InitialSwirl) -> Result<Self> {
        let p = AnsatzParams {
            topo,
            eps,
            a,
            data,
            shore_factor: 4.0,
            mutation: Mutation::None,
        };
        p.check_basic()?;
        Ok(p)
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        AnsatzParams { eps, ..self.clone() }
    }

    fn check_basic(&self) -> Result<()> {
        if !(self.eps > 0.0) || self.eps > 1.0 {
            return Err(Error::Config(format!("epsilon must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.a > 2.0 / 3.0 && self.a < 1.0) {
            return Err(Error::Config(format!("a must lie in (2/3, 1), got {}", self.a)));
        }
        if !(self.shore_factor >= 1.0) {
            return Err(Error::Config(format!(
                "shore factor must be >= 1, got {}",
                self.shore_factor
            )));
        }
        Ok(())
    }

    /// Ekman number `E = 2βε²`.
    pub fn ekman(&self) -> f64 {
        2.0 * self.topo.beta * self.eps * self.eps
    }

    /// `√E`.
    pub fn layer(&self) -> f64 {
        self.topo.s() * self.eps
    }

    /// `ε^{1-a}`.
    pub fn cutoff_scale(&self) -> f64 {
        self.eps.powf(1.0 - self.a)
    }

    /// Depth below which `u^θ_ε` vanishes.
    pub fn support_depth(&self) -> f64 {
        0.5 * self.shore_factor * self.cutoff_scale()
    }

    /// Checks that `O_ε` is nonempty and that both layers fit in every
    /// column where the cut-off amplitude is nonzero.
    pub fn validate(&self) -> Result<()> {
        self.check_basic()?;
        let c = self.cutoff_scale();
        let h = self.topo.depth.h;
        if !(c < h / 2.0) {
            return Err(Error::Config(format!(
                "eps^(1-a) = {c} must be below H/2 = {}",
                h / 2.0
            )));
        }
        if self.support_depth() >= h {
            return Err(Error::Config(format!(
                "shore cut-off depth {} exceeds the maximal depth {h}",
                self.support_depth()
            )));
        }
        let rho_s = self.support_start();
        let s = self.topo.s();
        let rule = Rule::uniform(rho_s, self.data.support_end(self.topo.depth.rho0), 400, 2);
        let dmax = rule
            .nodes
            .iter()
            .map(|&r| self.topo.delta(r).unwrap_or(1.0))
            .fold(1.0, f64::max);
        if self.eps.powf(self.a) * s * dmax > 1.0 {
            return Err(Error::Config(format!(
                "layers do not fit inside the cut-off: eps^a * sqrt(2 beta) * max delta = {} > 1",
                self.eps.powf(self.a) * s * dmax
            )));
        }
        Ok(())
    }

    /// Smallest ρ where `u^θ_ε` may be nonzero.
    pub fn support_start(&self) -> f64 {
        self.topo
            .depth
            .rho_at_depth(self.support_depth())
            .unwrap_or(self.topo.depth.rho0)
    }

    /// Abscissa where the shore cut-off reaches 1 − χ = 1.
    pub fn plateau_start(&self) -> Option<f64> {
        self.topo.depth.rho_at_depth(2.0 * self.support_depth())
    }
}

/// Named terms of the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Int0,
    Surf0,
    Bot0,
    SurfA,
    BotA,
    Int1,
    Surf1,
    Bot1,
    Surf2,
    Bot2,
}

impl Term {
    pub const ALL: [Term; 10] = [
        Term::Int0,
        Term::Surf0,
        Term::Bot0,
        Term::SurfA,
        Term::BotA,
        Term::Int1,
        Term::Surf1,
        Term::Bot1,
        Term::Surf2,
        Term::Bot2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Power of ε multiplying the term in the assembly.
    pub fn weight(self, eps: f64, a: f64) -> f64 {
        match self {
            Term::Int0 | Term::Surf0 | Term::Bot0 => 1.0,
            Term::SurfA | Term::BotA => eps.powf(a),
            Term::Int1 | Term::Surf1 | Term::Bot1 => eps,
            Term::Surf2 | Term::Bot2 => eps * eps,
        }
    }

    pub fn is_interior(self) -> bool {
        matches!(self, Term::Int0 | Term::Int1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Term::Int0 => "U0_int",
            Term::Surf0 => "U0_BL_surf",
            Term::Bot0 => "U0_BL_bot",
            Term::SurfA => "Ua_BL_surf",
            Term::BotA => "Ua_BL_bot",
            Term::Int1 => "U1_int",
            Term::Surf1 => "U1_BL_surf",
            Term::Bot1 => "U1_BL_bot",
            Term::Surf2 => "U2_BL_surf",
            Term::Bot2 => "U2_BL_bot",
        }
    }

    pub fn from_name(s: &str) -> Option<Term> {
        Term::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// A subset of terms to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermSet([bool; 10]);

impl TermSet {
    pub fn all() -> Self {
        TermSet([true; 10])
    }
    pub fn none() -> Self {
        TermSet([false; 10])
    }
    pub fn of(terms: &[Term]) -> Self {
        let mut s = TermSet::none();
        for t in terms {
            s.0[t.index()] = true;
        }
        s
    }
    pub fn interior() -> Self {
        TermSet::of(&[Term::Int0, Term::Int1])
    }
    pub fn layers() -> Self {
        let mut s = TermSet::all();
        s.0[Term::Int0.index()] = false;
        s.0[Term::Int1.index()] = false;
        s
    }
    /// Order-0 interior and layers without any corrector.
    pub fn order0() -> Self {
        TermSet::of(&[Term::Int0, Term::Surf0, Term::Bot0])
    }
    pub fn without(mut self, terms: &[Term]) -> Self {
        for t in terms {
            self.0[t.index()] = false;
        }
        self
    }
    pub fn contains(&self, t: Term) -> bool {
        self.0[t.index()]
    }
}

/// Frame components `(ρ, θ, z)`.
pub type FrameVec<T> = [T; 3];

/// Amplitudes entering the terms at one column: `u`, `m = λu`,
/// `v = δ^{1/3}u`, their horizontal divergences `D[f] = f′ + fΔρ`, and `P₀`.
#[derive(Clone, Copy, Debug)]
pub struct Amp<T> {
    pub u: T,
    pub m: T,
    pub v: T,
    pub du: T,
    pub dm: T,
    pub dv: T,
    pub p0: T,
}

/// Radial Taylor data of `u^θ_ε` and `∂_t u^θ_ε` about one ρ.
#[derive(Clone, Copy, Debug)]
pub struct AmpSeries {
    pub radial: RadialSeries,
    pub u: Series,
    pub ut: Series,
    pub ubar: Series,
    pub ubar_t: Series,
}

/// Evaluates the approximate solution for fixed parameters.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub params: AnsatzParams,
    k: &'static CutoffK,
}

/// Column-wise cache: everything that depends on `x_h` only.
#[derive(Clone, Debug)]
pub struct Column<'a, T> {
    ansatz: &'a Ansatz,
    pub frame: ShoreFrame<T>,
    pub phi: T,
    pub dphi: T,
    pub delta: T,
    pub ddelta: T,
    pub lambda: T,
    pub amp: Amp<T>,
    pub amp_t: Amp<T>,
    pub ubar: T,
    pub ubar_t: T,
}

/// Fast-variable factors at one height.
#[derive(Clone, Copy, Debug)]
pub struct Layer<T> {
    pub z: T,
    pub zeta: T,
    pub eta: T,
    chi_s: T,
    chi_s1: T,
    chi_b: T,
    chi_b1: T,
    chi_mut: T,
    es: T,
    f: T,
    sz: T,
    cz: T,
    se: T,
    ce: T,
    k_s: T,
    k_b: T,
    big_k_s: T,
    big_k_b: T,
    big_k1_b: T,
}

impl Ansatz {
    pub fn new(params: AnsatzParams) -> Result<Self> {
        params.check_basic()?;
        Ok(Ansatz {
            params,
            k: CutoffK::shared(),
        })
    }

    pub fn cutoff_k(&self) -> &'static CutoffK {
        self.k
    }

    fn cut_factor(&self, phi: Series) -> Series {
        let c = self.params.shore_factor * self.params.cutoff_scale();
        -chi(phi / c) + 1.0
    }

    pub fn amp_series(&self, t: f64, rho: f64) -> Result<AmpSeries> {
        let p = &self.params;
        let radial = p.topo.radial(rho)?;
        let rs = Series::var(rho);
        let u0 = p.data.u0(rs, radial.phi, p.topo.depth.rho0);
        let decay = (radial.lambda * -t).exp();
        let ubar = u0 * decay;
        let u = self.cut_factor(radial.phi) * ubar;
        Ok(AmpSeries {
            radial,
            u,
            ut: -(radial.lambda * u),
            ubar,
            ubar_t: -(radial.lambda * ubar),
        })
    }

    /// `u^θ_ε(t, ρ)`.
    pub fn u_theta_eps(&self, t: f64, rho: f64) -> Result<f64> {
        Ok(self.amp_series(t, rho)?.u.val())
    }

    /// `ū^θ(t, ρ) = u₀^θ(ρ) e^{-tλ_φ(ρ)}`.
    pub fn limit_theta(&self, t: f64, rho: f64) -> Result<f64> {
        Ok(self.amp_series(t, rho)?.ubar.val())
    }

    /// `(∫ u^θ_ε, ∫ ∂_t u^θ_ε)` from the support start up to `rho`.
    pub fn p0_integrals(&self, t: f64, rho: f64) -> Result<(f64, f64)> {
        let a = self.params.support_start();
        if rho <= a {
            return Ok((0.0, 0.0));
        }
        let panels = ((rho - a) / 0.1).ceil().max(1.0) as usize;
        let rule = Rule::uniform(a, rho, panels, 8);
        let mut s = (0.0, 0.0);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            let sr = self.amp_series(t, r)?;
            s.0 += w * sr.u.val();
            s.1 += w * sr.ut.val();
        }
        Ok(s)
    }

    /// Cumulative `p0_integrals` at sorted abscissae.
    pub fn p0_integrals_sorted(&self, t: f64, rhos: &[f64]) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(rhos.len());
        let mut prev = self.params.support_start();
        let mut acc = (0.0, 0.0);
        for &r in rhos {
            if r > prev {
                let panels = ((r - prev) / 0.1).ceil().max(1.0) as usize;
                let rule = Rule::uniform(prev, r, panels, 8);
                for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let sr = self.amp_series(t, x)?;
                    acc.0 += w * sr.u.val();
                    acc.1 += w * sr.ut.val();
                }
                prev = r;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Column data at horizontal position `(x, y)`. `p0` supplies the
    /// pressure integrals; with `None` they are computed by quadrature.
    pub fn column<T: Scalar>(
        &self,
        t: f64,
        x: T,
        y: T,
        p0: Option<(f64, f64)>,
    ) -> Result<Column<'_, T>> {
        let topo = &self.params.topo;
        let frame = topo.frame(x, y)?;
        let rho = frame.rho.val();
        if rho < topo.depth.rho0 {
            return Err(Error::Domain(format!(
                "rho = {rho} lies on land (rho0 = {})",
                topo.depth.rho0
            )));
        }
        let s = self.amp_series(t, rho)?;
        let r = &s.radial;
        let (i0, i1) = match p0 {
            Some(v) => v,
            None => self.p0_integrals(t, rho)?,
        };
        let lift = |q: &Series| frame.rho.compose(&q.0);
        let d13 = (r.dphi * r.dphi + 1.0).powf(0.25);
        let lap = frame.lap;
        let amp = |u: Series, integral: f64| {
            let m = r.lambda * u;
            let v = d13 * u;
            let div = |f: &Series| lift(&f.deriv()) + lift(f) * lap;
            Amp {
                u: lift(&u),
                m: lift(&m),
                v: lift(&v),
                du: div(&u),
                dm: div(&m),
                dv: div(&v),
                p0: lift(&u.integral(integral)),
            }
        };
        Ok(Column {
            ansatz: self,
            phi: lift(&r.phi),
            dphi: lift(&r.dphi),
            delta: lift(&r.delta),
            ddelta: lift(&r.delta.deriv()),
            lambda: lift(&r.lambda),
            amp: amp(s.u, i0),
            amp_t: amp(s.ut, i1),
            ubar: lift(&s.ubar),
            ubar_t: lift(&s.ubar_t),
            frame,
        })
    }

    /// Frame components of the limit profile.
    pub fn limit_profile(&self, t: f64, x: [f64; 3]) -> Result<FrameVec<f64>> {
        let f = self.params.topo.frame(x[0], x[1])?;
        Ok([0.0, self.limit_theta(t, f.rho)?, 0.0])
    }

    /// Assembled velocity (Cartesian) and pressure at a point of the closure
    /// of `Ω_φ`.
    pub fn eval<T: Scalar>(&self, t: f64, x: [T; 3], set: TermSet) -> Result<([T; 3], T)> {
        let col = self.column(t, x[0], x[1], None)?;
        col.check_height(x[2].val())?;
        let layer = col.layer(x[2]);
        Ok((col.velocity(&layer, set, false), col.pressure(&layer, set, false)))
    }

    /// Frame components of a single unweighted term.
    pub fn term<T: Scalar>(&self, term: Term, t: f64, x: [T; 3]) -> Result<FrameVec<T>> {
        let col = self.column(t, x[0], x[1], None)?;
        col.check_height(x[2].val())?;
        let layer = col.layer(x[2]);
        Ok(col.terms(&layer, &col.amp)[term.index()])
    }
}

impl<'a, T: Scalar> Column<'a, T> {
    pub fn params(&self) -> &AnsatzParams {
        &self.ansatz.params
    }

    pub fn check_height(&self, z: f64) -> Result<()> {
        let phi = self.phi.val();
        let tol = 1e-12 * (1.0 + phi);
        if z > tol || z < -phi - tol {
            return Err(Error::Domain(format!(
                "z = {z} outside the column [-{phi}, 0]"
            )));
        }
        Ok(())
    }

    pub fn layer(&self, z: T) -> Layer<T> {
        let p = &self.ansatz.params;
        let e = p.layer();
        let c = p.cutoff_scale();
        let k = self.ansatz.k;
        let zeta = z / e;
        let zb = z + self.phi;
        let eta = zb / (self.delta * e);
        let arg_s = -z / c;
        let arg_b = zb / c;
        let chi_b = chi(arg_b);
        Layer {
            z,
            zeta,
            eta,
            chi_s: chi(arg_s),
            chi_s1: chi_prime(arg_s),
            chi_b,
            chi_b1: chi_prime(arg_b),
            chi_mut: chi_b,
            es: zeta.exp(),
            f: (-eta).exp(),
            sz: zeta.sin(),
            cz: zeta.cos(),
            se: eta.sin(),
            ce: eta.cos(),
            k_s: k.k(zeta),
            k_b: k.k(-eta),
            big_k_s: k.big_k(zeta),
            big_k_b: k.big_k(-eta),
            big_k1_b: k.big_k1(-eta),
        }
    }

    /// All terms (unweighted, frame components) for amplitudes `a`.
    pub fn terms(&self, l: &Layer<T>, a: &Amp<T>) -> [FrameVec<T>; 10] {
        let p = &self.ansatz.params;
        let s = p.topo.s();
        let hs = 0.5 * s;
        let zero = T::cst(0.0);
        let dphi = self.dphi;
        let delta = self.delta;
        let dm23 = delta.powf(-2.0 / 3.0);
        let h = l.f * (l.ce + l.se);
        let osc_s = l.es * (l.cz - l.sz);
        let surf1_cut = match p.mutation {
            Mutation::CutoffVariable => l.chi_mut,
            _ => l.chi_s,
        };
        let mut surf1_z = a.du * hs * surf1_cut * osc_s;
        if p.mutation == Mutation::SignFlip {
            surf1_z = -surf1_z;
        }
        let bot0_r = -(a.u * dm23 * l.chi_b * l.f * l.se);
        let bota_r = a.v * hs * l.chi_b1 * h;
        [
            [zero, a.u, zero],
            [
                a.u * l.chi_s * l.es * l.sz,
                -(a.u * l.chi_s * l.es * l.cz),
                zero,
            ],
            [bot0_r, -(a.u * l.chi_b * l.f * l.ce), -(dphi * bot0_r)],
            [a.u * hs * l.chi_s1 * osc_s, zero, zero],
            [bota_r, zero, -(dphi * bota_r)],
            [a.m, zero, -(a.du * hs) - l.z * a.dm],
            [-(a.m * l.k_s), zero, surf1_z],
            [
                -(a.m * l.k_b),
                zero,
                -(a.dv * hs * l.chi_b * h)
                    - a.v * s * l.chi_b * l.f * l.se * l.eta * self.ddelta / delta
                    + a.m * dphi * l.k_b,
            ],
            [zero, zero, -(a.dm * s * l.big_k_s)],
            [
                zero,
                zero,
                a.dm * s * delta * l.big_k_b - self.ddelta * s * a.m * l.big_k1_b,
            ],
        ]
    }

    /// Weighted sum of the selected terms, in frame components.
    pub fn frame_velocity(&self, l: &Layer<T>, set: TermSet, dt: bool) -> FrameVec<T> {
        let p = &self.ansatz.params;
        let amp = if dt { &self.amp_t } else { &self.amp };
        let terms = self.terms(l, amp);
        let mut acc = [T::cst(0.0); 3];
        for term in Term::ALL {
            if set.contains(term) {
                let w = term.weight(p.eps, p.a);
                for c in 0..3 {
                    acc[c] = acc[c] + terms[term.index()][c] * w;
                }
            }
        }
        acc
    }

    /// Frame to Cartesian conversion with the local `(∇ρ, ∇⊥ρ, e_z)`.
    pub fn to_cartesian(&self, v: FrameVec<T>) -> [T; 3] {
        let n = self.frame.grad;
        [v[0] * n[0] - v[1] * n[1], v[0] * n[1] + v[1] * n[0], v[2]]
    }

    pub fn velocity(&self, l: &Layer<T>, set: TermSet, dt: bool) -> [T; 3] {
        self.to_cartesian(self.frame_velocity(l, set, dt))
    }

    /// `P₀ + ε P₁^bot`, restricted to the terms present in `set`.
    pub fn pressure(&self, l: &Layer<T>, set: TermSet, dt: bool) -> T {
        let p = &self.ansatz.params;
        let amp = if dt { &self.amp_t } else { &self.amp };
        let mut out = T::cst(0.0);
        if set.contains(Term::Int0) {
            out = out + amp.p0;
        }
        if set.contains(Term::Bot1) {
            let g = l.f * (l.se - l.ce);
            let p1 = -(self.delta.powf(-1.0 / 3.0) * self.dphi * amp.u * g * (0.5 * p.topo.s()));
            out = out + p1 * p.eps;
        }
        out
    }

    /// Cartesian limit profile `ū^θ ∇⊥ρ`.
    pub fn limit(&self, dt: bool) -> [T; 3] {
        let u = if dt { self.ubar_t } else { self.ubar };
        self.to_cartesian([T::cst(0.0), u, T::cst(0.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::scalar::Jet;
    use crate::geometry::{ConvexShore, DepthFamily, DepthProfile};
    use crate::profiles::data::SwirlFamily;

    fn params(eps: f64) -> AnsatzParams {
        let topo = Topography::new(
            ConvexShore::disk(1.0).unwrap(),
            DepthProfile::new(DepthFamily::Exp, 0.1, 4.0, 2.0).unwrap(),
            0.5,
        )
        .unwrap();
        let data = InitialSwirl::new(SwirlFamily::Gaussian, 0.25, 4.0, 2.0).unwrap();
        AnsatzParams::new(topo, eps, 0.75, data).unwrap()
    }

    fn jet_point(x: [f64; 3]) -> [Jet; 3] {
        [Jet::var(0, x[0]), Jet::var(1, x[1]), Jet::var(2, x[2])]
    }

    #[test]
    fn cut_amplitude_examples() {
        let mut p = params(0.1);
        p.shore_factor = 1.0;
        let an = Ansatz::new(p).unwrap();
        let c = an.params.cutoff_scale();
        let deep = an.params.topo.depth.rho_at_depth(1.2 * c).unwrap();
        let bare = an.limit_theta(0.7, deep).unwrap();
        assert_eq!(an.u_theta_eps(0.7, deep).unwrap(), bare);
        let shallow = an.params.topo.depth.rho_at_depth(0.45 * c).unwrap();
        assert_eq!(an.u_theta_eps(0.7, shallow).unwrap(), 0.0);
        let r = 5.0;
        let u0 = an.params.data.u0(r, an.params.topo.depth.phi(r), 0.1);
        assert_eq!(an.u_theta_eps(0.0, r).unwrap(), u0);
    }

    #[test]
    fn surface_trace_cancels_interior() {
        let an = Ansatz::new(params(0.1)).unwrap();
        let x = [6.0, 0.0, 0.0];
        let i = an.term(Term::Int0, 0.3, x).unwrap();
        let s = an.term(Term::Surf0, 0.3, x).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] + i[1]).abs() < 1e-16);
    }

    #[test]
    fn surface_layer_at_minus_pi() {
        // ε small enough that the surface cut-off is still 1 at ζ = -π
        let an = Ansatz::new(params(0.05)).unwrap();
        let z = -std::f64::consts::PI * an.params.layer();
        let s = an.term(Term::Surf0, 0.0, [6.0, 0.0, z]).unwrap();
        let u = an.u_theta_eps(0.0, 5.0).unwrap();
        assert!((s[1] - u * (-std::f64::consts::PI).exp()).abs() < 1e-15 * u.abs().max(1.0));
        assert!(s[0].abs() < 1e-16);
    }

    #[test]
    fn bottom_terms_are_tangent_to_the_bottom() {
        let an = Ansatz::new(params(0.1)).unwrap();
        for &(r, zf) in &[(1.8, 0.99), (2.5, 0.97), (3.0, 0.999)] {
            let phi = an.params.topo.depth.phi(r - 1.0);
            let x = [r, 0.0, -zf * phi];
            let dphi = an.params.topo.dphi(r - 1.0).unwrap();
            for term in [Term::Bot0, Term::BotA] {
                let v = an.term(term, 0.2, x).unwrap();
                assert!((v[2] + dphi * v[0]).abs() < 1e-15 * (1.0 + v[0].abs()));
            }
        }
    }

    #[test]
    fn interior_time_derivative_matches_pumping() {
        let an = Ansatz::new(params(0.05)).unwrap();
        let col = an.column(0.4, 4.0, 1.0, None).unwrap();
        let l = col.layer(-1.0);
        let i1 = col.terms(&l, &col.amp)[Term::Int1.index()];
        assert!((col.amp_t.u + i1[0]).abs() < 1e-15);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let an = Ansatz::new(params(0.1)).unwrap();
        let x0 = [2.3, 0.8, -0.02];
        let (v, _) = an.eval(0.2, jet_point(x0), TermSet::all()).unwrap();
        let h = [1e-5, 1e-5, 1e-5 * an.params.layer()];
        for d in 0..3 {
            let mut xp = x0;
            let mut xm = x0;
            xp[d] += h[d];
            xm[d] -= h[d];
            let (vp, _) = an.eval(0.2, xp, TermSet::all()).unwrap();
            let (vm, _) = an.eval(0.2, xm, TermSet::all()).unwrap();
            for c in 0..3 {
                let fd = (vp[c] - vm[c]) / (2.0 * h[d]);
                let scale = 1.0 + v[c].g[d].abs();
                assert!(
                    (fd - v[c].g[d]).abs() <= 1e-6 * scale,
                    "d={d} c={c} fd={fd} jet={}",
                    v[c].g[d]
                );
            }
        }
    }

    #[test]
    fn layer_odes_hold() {
        // Untruncated surface profile in ζ: (e^ζ sin ζ, -e^ζ cos ζ).
        for i in 0..50 {
            let z = -(i as f64) * 0.2;
            let zs = Series::var(z);
            let ur = zs.exp() * zs.sin();
            let ut = -(zs.exp() * zs.cos());
            assert!((-0.5 * ur.derivative(2) - ut.val()).abs() < 1e-14);
            assert!((-0.5 * ut.derivative(2) + ur.val()).abs() < 1e-14);
        }
        // Bottom profile in ζ₁ = -η with slope coefficient.
        let dphi: f64 = 0.7;
        let delta = crate::geometry::delta_of(dphi);
        let q = 1.0 + dphi * dphi;
        for i in 0..50 {
            let z = -(i as f64) * 0.2;
            let zs = Series::var(z);
            let ur = zs.exp() * zs.sin() * delta.powf(-2.0 / 3.0);
            let ut = -(zs.exp() * zs.cos());
            let r1 = -q * q / (2.0 * delta * delta) * ur.derivative(2) - ut.val();
            let r2 = -q / (2.0 * delta * delta) * ut.derivative(2) + ur.val();
            assert!(r1.abs() < 1e-14 && r2.abs() < 1e-14);
        }
    }

    #[test]
    fn pressure_at_bottom() {
        let an = Ansatz::new(params(0.1)).unwrap();
        let r = 2.0;
        let phi = an.params.topo.depth.phi(r - 1.0);
        let col = an.column(0.0, r, 0.0, Some((0.0, 0.0))).unwrap();
        let l = col.layer(-phi);
        let p1 = col.pressure(&l, TermSet::of(&[Term::Bot1]), false) / 0.1;
        let dphi = an.params.topo.dphi(r - 1.0).unwrap();
        let delta = an.params.topo.delta(r - 1.0).unwrap();
        let u = an.u_theta_eps(0.0, r - 1.0).unwrap();
        let expect = (1.0f64).sqrt() / 2.0 * (1.0 + dphi * dphi) / delta.powf(5.0 / 3.0) * dphi * u;
        assert!((p1 - expect).abs() < 1e-14);
    }
}
