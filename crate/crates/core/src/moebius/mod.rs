//! Möbius maps of the disk, the exterior disk and the upper half-plane.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod transfer;

pub use transfer::{
    halfplane_pullback, halfplane_transfer, pullback, HalfPlaneField, HalfPlaneGrid, HalfPlaneNorm,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Disk,
    Exterior,
    HalfPlane,
}

impl Domain {
    /// Whether `z` lies strictly inside the domain.
    pub fn contains(self, z: C64) -> bool {
        match self {
            Domain::Disk => z.norm_sqr() < 1.0,
            Domain::Exterior => z.norm_sqr() > 1.0,
            Domain::HalfPlane => z.im > 0.0,
        }
    }
}

/// Hyperbolic density of the tagged domain.
pub fn density(domain: Domain, z: C64) -> Result<f64> {
    if !z.re.is_finite() || !z.im.is_finite() || !domain.contains(z) {
        return Err(Error::Domain(format!(
            "point {z} is not inside the {domain:?} domain"
        )));
    }
    Ok(density_unchecked(domain, z))
}

#[inline]
pub(crate) fn density_unchecked(domain: Domain, z: C64) -> f64 {
    match domain {
        Domain::Disk => 2.0 / (1.0 - z.norm_sqr()),
        Domain::Exterior => 2.0 / (z.norm_sqr() - 1.0),
        Domain::HalfPlane => 1.0 / z.im,
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(C64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<C64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }
}

/// `z -> (a z + b) / (c z + d)` with `ad - bc = 1`, tagged by the domain it preserves
/// (or, for transfer maps, the domain it is applied on).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub domain: Domain,
}

const BOUNDARY_TOL: f64 = 1e-12;

impl MobiusMap {
    /// Normalizes the determinant and checks that the map preserves `domain`.
    pub fn new(a: C64, b: C64, c: C64, d: C64, domain: Domain) -> Result<Self> {
        let m = Self::from_matrix_unchecked(a, b, c, d, domain)?;
        m.check_preserves(domain)?;
        Ok(m)
    }

    /// Normalizes the determinant only.
    pub fn from_matrix_unchecked(a: C64, b: C64, c: C64, d: C64, domain: Domain) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() > 1e-300) || !det.re.is_finite() || !det.im.is_finite() {
            return Err(Error::Validation("degenerate Möbius matrix".into()));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            domain,
        })
    }

    pub fn identity(domain: Domain) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
            domain,
        }
    }

    /// `z -> e^{i theta} z` on the disk or its exterior.
    pub fn rotation(theta: f64, domain: Domain) -> Self {
        let h = C64::from_polar(1.0, theta / 2.0);
        Self {
            a: h,
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: h.conj(),
            domain,
        }
    }

    /// `z -> e^{i theta} (z - p) / (1 - conj(p) z)` with |p| < 1.
    pub fn disk_automorphism(theta: f64, p: C64, domain: Domain) -> Result<Self> {
        if p.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "automorphism center {p} outside the disk"
            )));
        }
        let e = C64::from_polar(1.0, theta);
        Self::new(e, -e * p, -p.conj(), C64::new(1.0, 0.0), domain)
    }

    /// `zeta -> lambda zeta` on the upper half-plane.
    pub fn halfplane_scaling(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Validation(format!(
                "scaling {lambda} must be positive"
            )));
        }
        let s = lambda.sqrt();
        Ok(Self {
            a: C64::new(s, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::new(1.0 / s, 0.0),
            domain: Domain::HalfPlane,
        })
    }

    /// Map of the exterior disk onto the upper half-plane sending `attract` to 0
    /// and `repel` to infinity; both must be distinct points of the unit circle.
    pub fn exterior_to_halfplane(attract: C64, repel: C64) -> Result<Self> {
        if ((attract.norm() - 1.0).abs() > 1e-9) || ((repel.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::Domain(
                "fixed points must lie on the unit circle".into(),
            ));
        }
        if (attract - repel).norm() < 1e-12 {
            return Err(Error::Domain("fixed points coincide".into()));
        }
        // z -> (z - a)/(z - r) sends the circle to a line through 0; rotate it onto R.
        let mut probe = attract * C64::new(0.0, 1.0);
        if (probe - repel).norm() < 1e-3 {
            probe = -probe;
        }
        let w = (probe - attract) / (probe - repel);
        let mut kappa = C64::from_polar(1.0, -w.arg());
        let out = 2.0 * attract;
        if (kappa * (out - attract) / (out - repel)).im < 0.0 {
            kappa = -kappa;
        }
        Self::from_matrix_unchecked(
            kappa,
            -kappa * attract,
            C64::new(1.0, 0.0),
            -repel,
            Domain::Exterior,
        )
    }

    /// Hyperbolic map of the exterior disk with multiplier `lambda` in (0,1),
    /// attracting fixed point `e^{i a}` and repelling fixed point `e^{i r}`.
    pub fn exterior_hyperbolic(lambda: f64, attract_angle: f64, repel_angle: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Validation(format!(
                "multiplier {lambda} not in (0,1)"
            )));
        }
        let h = Self::exterior_to_halfplane(
            C64::from_polar(1.0, attract_angle),
            C64::from_polar(1.0, repel_angle),
        )?;
        let s = Self::halfplane_scaling(lambda)?;
        let g = h.inverse().matmul(&s).matmul(&h);
        Ok(Self {
            domain: Domain::Exterior,
            ..g
        })
    }

    pub fn apply(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        if den.norm_sqr() == 0.0 {
            return C64::new(f64::INFINITY, f64::INFINITY);
        }
        (self.a * z + self.b) / den
    }

    pub fn apply_sphere(&self, p: SpherePoint) -> SpherePoint {
        match p {
            SpherePoint::Infinity => {
                if self.c.norm() < 1e-300 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let den = self.c * z + self.d;
                if den.norm() < 1e-300 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Complex derivative; the determinant is one so this is `(cz+d)^{-2}`.
    pub fn derivative(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        (den * den).inv()
    }

    fn matmul(&self, o: &Self) -> Self {
        let a = self.a * o.a + self.b * o.c;
        let b = self.a * o.b + self.b * o.d;
        let c = self.c * o.a + self.d * o.c;
        let d = self.c * o.b + self.d * o.d;
        // Product of unit-determinant matrices; renormalize to stop drift.
        Self::from_matrix_unchecked(a, b, c, d, o.domain).unwrap_or(Self {
            a,
            b,
            c,
            d,
            domain: o.domain,
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = self.matmul(other);
        m.domain = self.domain;
        m
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
            domain: self.domain,
        }
    }

    pub fn power(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { *self };
        let mut acc = Self::identity(self.domain);
        let mut b = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&b);
            }
            b = b.compose(&b);
            k >>= 1;
        }
        acc
    }

    /// `h ∘ self ∘ h^{-1}`, tagged with h's target domain `target`.
    pub fn conjugate_by(&self, h: &Self, target: Domain) -> Self {
        let mut m = h.matmul(self).matmul(&h.inverse());
        m.domain = target;
        m
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    fn boundary_samples(domain: Domain) -> Vec<C64> {
        match domain {
            Domain::Disk | Domain::Exterior => (0..16)
                .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * (j as f64 + 0.25) / 16.0))
                .collect(),
            Domain::HalfPlane => (0..16)
                .map(|j| C64::new((j as f64 - 7.5) * 0.75, 0.0))
                .collect(),
        }
    }

    fn interior_probe(domain: Domain) -> C64 {
        match domain {
            Domain::Disk => C64::new(0.1, 0.2),
            Domain::Exterior => C64::new(3.0, -1.0),
            Domain::HalfPlane => C64::new(0.3, 1.7),
        }
    }

    /// Checks that the boundary and an interior probe go where they should.
    pub fn check_preserves(&self, domain: Domain) -> Result<()> {
        for z in Self::boundary_samples(domain) {
            let w = self.apply_sphere(SpherePoint::Finite(z));
            let ok = match (domain, w) {
                (_, SpherePoint::Infinity) => domain == Domain::HalfPlane,
                (Domain::Disk | Domain::Exterior, SpherePoint::Finite(w)) => {
                    (w.norm() - 1.0).abs() <= BOUNDARY_TOL * 10.0
                }
                (Domain::HalfPlane, SpherePoint::Finite(w)) => {
                    w.im.abs() <= BOUNDARY_TOL * (1.0 + w.norm())
                }
            };
            if !ok {
                return Err(Error::Domain(format!(
                    "map does not preserve the {domain:?} boundary"
                )));
            }
        }
        let probe = Self::interior_probe(domain);
        let w = self.apply(probe);
        if !domain.contains(w) {
            return Err(Error::Domain(format!(
                "map does not preserve the {domain:?} domain"
            )));
        }
        Ok(())
    }

    /// Checks that the map sends the exterior disk onto the upper half-plane.
    pub fn check_exterior_to_halfplane(&self) -> Result<()> {
        for z in Self::boundary_samples(Domain::Exterior) {
            match self.apply_sphere(SpherePoint::Finite(z)) {
                SpherePoint::Infinity => {}
                SpherePoint::Finite(w) if w.im.abs() <= 1e-9 * (1.0 + w.norm()) => {}
                _ => {
                    return Err(Error::Domain(
                        "map does not send the unit circle to R".into(),
                    ))
                }
            }
        }
        if self.apply(C64::new(3.0, -1.0)).im <= 0.0 {
            return Err(Error::Domain(
                "map does not send the exterior disk to the upper half-plane".into(),
            ));
        }
        Ok(())
    }

    pub fn fixed_points(&self) -> Vec<SpherePoint> {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if c.norm() < 1e-14 {
            let mut pts = vec![SpherePoint::Infinity];
            if (a - d).norm() > 1e-14 {
                pts.insert(0, SpherePoint::Finite(b / (d - a)));
            }
            return pts;
        }
        // c z^2 + (d - a) z - b = 0
        let disc = ((d - a) * (d - a) + 4.0 * b * c).sqrt();
        let z1 = (a - d + disc) / (2.0 * c);
        let z2 = (a - d - disc) / (2.0 * c);
        if (z1 - z2).norm() < 1e-9 {
            vec![SpherePoint::Finite(0.5 * (z1 + z2))]
        } else {
            vec![SpherePoint::Finite(z1), SpherePoint::Finite(z2)]
        }
    }

    /// Modulus of the derivative at a fixed point (multiplier there).
    fn multiplier_at(&self, p: SpherePoint) -> f64 {
        match p {
            SpherePoint::Finite(z) => self.derivative(z).norm(),
            // In the chart w = 1/z the fixed point at infinity has multiplier (d/a)^{...}
            SpherePoint::Infinity => (self.d / self.a).norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobiusKind {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobiusClass {
    pub kind: MobiusKind,
    pub fixed_points: Vec<SpherePoint>,
    /// Multiplier in (0,1) for hyperbolic maps.
    pub multiplier: Option<f64>,
    pub attracting: Option<SpherePoint>,
    pub repelling: Option<SpherePoint>,
    /// Map sending the attracting point to 0 and the repelling point to infinity,
    /// from the map's domain onto the upper half-plane.
    pub normalizer: Option<MobiusMap>,
}

pub const PARABOLIC_TOL: f64 = 1e-10;

pub fn classify(m: &MobiusMap) -> MobiusClass {
    let one = C64::new(1.0, 0.0);
    let is_identity = ((m.a - one).norm() < 1e-12 && (m.d - one).norm() < 1e-12
        || (m.a + one).norm() < 1e-12 && (m.d + one).norm() < 1e-12)
        && m.b.norm() < 1e-12
        && m.c.norm() < 1e-12;
    if is_identity {
        return MobiusClass {
            kind: MobiusKind::Identity,
            fixed_points: vec![],
            multiplier: None,
            attracting: None,
            repelling: None,
            normalizer: None,
        };
    }
    let tr = m.trace();
    let tr2 = tr * tr;
    let fixed_points = m.fixed_points();
    if (tr2 - 4.0).norm() < PARABOLIC_TOL {
        return MobiusClass {
            kind: MobiusKind::Parabolic,
            fixed_points,
            multiplier: None,
            attracting: None,
            repelling: None,
            normalizer: None,
        };
    }
    if tr2.re < 4.0 && tr2.im.abs() < 1e-9 {
        return MobiusClass {
            kind: MobiusKind::Elliptic,
            fixed_points,
            multiplier: None,
            attracting: None,
            repelling: None,
            normalizer: None,
        };
    }
    // lambda + 1/lambda + 2 = tr^2 with lambda < 1.
    let t = tr2.re.max(4.0).sqrt();
    let lambda = {
        let s = (t - (t * t - 4.0).max(0.0).sqrt()) / 2.0;
        s * s
    };
    let (att, rep) = if fixed_points.len() == 2 {
        let m0 = m.multiplier_at(fixed_points[0]);
        let m1 = m.multiplier_at(fixed_points[1]);
        if m0 < m1 {
            (fixed_points[0], fixed_points[1])
        } else {
            (fixed_points[1], fixed_points[0])
        }
    } else {
        (fixed_points[0], fixed_points[0])
    };
    let normalizer = normalizer_for(m.domain, att, rep);
    MobiusClass {
        kind: MobiusKind::Hyperbolic,
        fixed_points,
        multiplier: Some(lambda),
        attracting: Some(att),
        repelling: Some(rep),
        normalizer,
    }
}

fn normalizer_for(domain: Domain, att: SpherePoint, rep: SpherePoint) -> Option<MobiusMap> {
    match domain {
        Domain::Disk | Domain::Exterior => {
            let (a, r) = (att.finite()?, rep.finite()?);
            let h = MobiusMap::exterior_to_halfplane(a / a.norm(), r / r.norm()).ok()?;
            if domain == Domain::Exterior {
                Some(h)
            } else {
                // h sends the disk to the lower half-plane; negate.
                MobiusMap::from_matrix_unchecked(-h.a, -h.b, h.c, h.d, Domain::Disk).ok()
            }
        }
        Domain::HalfPlane => match (att, rep) {
            (SpherePoint::Finite(a), SpherePoint::Infinity) => MobiusMap::from_matrix_unchecked(
                C64::new(1.0, 0.0),
                -a,
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                Domain::HalfPlane,
            )
            .ok(),
            (SpherePoint::Infinity, SpherePoint::Finite(r)) => {
                // zeta -> -1/(zeta - r)
                MobiusMap::from_matrix_unchecked(
                    C64::new(0.0, 0.0),
                    C64::new(-1.0, 0.0),
                    C64::new(1.0, 0.0),
                    -r,
                    Domain::HalfPlane,
                )
                .ok()
            }
            (SpherePoint::Finite(a), SpherePoint::Finite(r)) => {
                let h = MobiusMap::from_matrix_unchecked(
                    C64::new(1.0, 0.0),
                    -a,
                    C64::new(1.0, 0.0),
                    -r,
                    Domain::HalfPlane,
                )
                .ok()?;
                if h.apply(C64::new(0.5 * (a.re + r.re), 1.0)).im > 0.0 {
                    Some(h)
                } else {
                    MobiusMap::from_matrix_unchecked(
                        C64::new(-1.0, 0.0),
                        a,
                        C64::new(1.0, 0.0),
                        -r,
                        Domain::HalfPlane,
                    )
                    .ok()
                }
            }
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn densities() {
        assert_abs_diff_eq!(density(Domain::Disk, C64::new(0.0, 0.0)).unwrap(), 2.0);
        assert_abs_diff_eq!(
            density(Domain::Exterior, C64::new(2.0, 0.0)).unwrap(),
            2.0 / 3.0
        );
        assert_abs_diff_eq!(density(Domain::HalfPlane, C64::new(0.0, 1.0)).unwrap(), 1.0);
        assert!(density(Domain::Disk, C64::new(1.0, 0.0)).is_err());
        assert!(density(Domain::Exterior, C64::new(0.5, 0.0)).is_err());
        assert!(density(Domain::HalfPlane, C64::new(0.5, -1.0)).is_err());
    }

    #[test]
    fn identity_and_rotation() {
        let id = MobiusMap::identity(Domain::Disk);
        assert_eq!(classify(&id).kind, MobiusKind::Identity);
        let rot = MobiusMap::rotation(std::f64::consts::FRAC_PI_3, Domain::Disk);
        rot.check_preserves(Domain::Disk).unwrap();
        let cls = classify(&rot);
        assert_eq!(cls.kind, MobiusKind::Elliptic);
        assert_eq!(cls.fixed_points.len(), 2);
        assert!(cls.fixed_points.contains(&SpherePoint::Infinity));
        assert!(cls
            .fixed_points
            .contains(&SpherePoint::Finite(C64::new(0.0, 0.0))));
    }

    #[test]
    fn halfplane_quarter_scaling() {
        let m = MobiusMap::halfplane_scaling(0.25).unwrap();
        let cls = classify(&m);
        assert_eq!(cls.kind, MobiusKind::Hyperbolic);
        assert_abs_diff_eq!(cls.multiplier.unwrap(), 0.25, epsilon = 1e-14);
        assert!(matches!(cls.attracting, Some(SpherePoint::Finite(z)) if z.norm() < 1e-14));
        assert_eq!(cls.repelling, Some(SpherePoint::Infinity));
        let tr2 = (m.trace() * m.trace()).re;
        assert_abs_diff_eq!(tr2, 0.25 + 4.0 + 2.0, epsilon = 1e-12);
    }

    #[test]
    fn exterior_hyperbolic_normal_form() {
        let g = MobiusMap::exterior_hyperbolic(0.25, 0.3, 2.1).unwrap();
        g.check_preserves(Domain::Exterior).unwrap();
        let cls = classify(&g);
        assert_eq!(cls.kind, MobiusKind::Hyperbolic);
        assert_abs_diff_eq!(cls.multiplier.unwrap(), 0.25, epsilon = 1e-12);
        let h = cls.normalizer.unwrap();
        h.check_exterior_to_halfplane().unwrap();
        for z in [C64::new(2.0, 0.5), C64::new(-1.5, 3.0), C64::new(0.1, -1.2)] {
            let lhs = h.apply(g.apply(z));
            let rhs = 0.25 * h.apply(z);
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }
        let nf = g.conjugate_by(&h, Domain::HalfPlane);
        assert_abs_diff_eq!(classify(&nf).multiplier.unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn disk_normalizer_maps_disk_to_halfplane() {
        let g = MobiusMap::exterior_hyperbolic(0.3, 1.0, -2.0).unwrap();
        let gd = MobiusMap {
            domain: Domain::Disk,
            ..g
        };
        let cls = classify(&gd);
        let h = cls.normalizer.unwrap();
        assert!(h.apply(C64::new(0.1, 0.2)).im > 0.0);
        let z = C64::new(0.3, -0.4);
        let lhs = h.apply(gd.apply(z));
        assert!((lhs - 0.3 * h.apply(z)).norm() < 1e-10);
    }

    #[test]
    fn automorphism_preserves_disk_and_exterior() {
        let m = MobiusMap::disk_automorphism(0.7, C64::new(0.3, -0.2), Domain::Disk).unwrap();
        m.check_preserves(Domain::Disk).unwrap();
        let e = MobiusMap {
            domain: Domain::Exterior,
            ..m
        };
        e.check_preserves(Domain::Exterior).unwrap();
        assert!(MobiusMap::new(
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            Domain::Disk
        )
        .is_err());
    }

    #[test]
    fn composition_matches_application() {
        let m1 = MobiusMap::disk_automorphism(0.2, C64::new(0.1, 0.4), Domain::Disk).unwrap();
        let m2 = MobiusMap::disk_automorphism(-1.1, C64::new(-0.5, 0.1), Domain::Disk).unwrap();
        let m = m1.compose(&m2);
        let det = m.a * m.d - m.b * m.c;
        assert!((det - 1.0).norm() < 1e-14);
        let z = C64::new(0.2, 0.3);
        assert!((m.apply(z) - m1.apply(m2.apply(z))).norm() < 1e-14);
        assert!((m.inverse().apply(m.apply(z)) - z).norm() < 1e-14);
        let p3 = m1.power(3);
        assert!((p3.apply(z) - m1.apply(m1.apply(m1.apply(z)))).norm() < 1e-13);
        let pm2 = m1.power(-2);
        assert!((m1.apply(m1.apply(pm2.apply(z))) - z).norm() < 1e-13);
    }

    #[test]
    fn parabolic_classification() {
        // zeta -> zeta + 1
        let m = MobiusMap::new(
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            Domain::HalfPlane,
        )
        .unwrap();
        assert_eq!(classify(&m).kind, MobiusKind::Parabolic);
    }
}
