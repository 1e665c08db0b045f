//! The concrete geometric objects: invariant forms, Killing fields, the
//! Taub-NUT metric and its horizon extensions, the generalized family, and
//! the canonical orbit metric.

use crate::atom::{Atom, Coord};
use crate::error::{Error, Result};
use crate::expr::{concrete_f, Expr, Point};
use crate::forms::{Chart, DiffForm, SymTensor2, VecField};
use crate::tetrad::Tetrad;
use num_rational::BigRational;
use std::collections::BTreeMap;

/// sigma_z = dpsi + cos(theta) dphi on any chart containing psi, theta, phi.
pub fn sigma_z(chart: &Chart) -> Result<DiffForm> {
    let dpsi = DiffForm::d_coord(chart, Coord::Psi)?;
    let dphi = DiffForm::d_coord(chart, Coord::Phi)?;
    dpsi.add(&dphi.scale(&Expr::atom(Atom::CosTheta)))
}

/// sigma_x = sin(psi) dtheta - sin(theta) cos(psi) dphi.
pub fn sigma_x(chart: &Chart) -> Result<DiffForm> {
    let dtheta = DiffForm::d_coord(chart, Coord::Theta)?;
    let dphi = DiffForm::d_coord(chart, Coord::Phi)?;
    dtheta.scale(&Expr::atom(Atom::SinPsi)).sub(
        &dphi.scale(&Expr::atom(Atom::SinTheta).mul(&Expr::atom(Atom::CosPsi))),
    )
}

/// sigma_y = cos(psi) dtheta + sin(theta) sin(psi) dphi.
pub fn sigma_y(chart: &Chart) -> Result<DiffForm> {
    let dtheta = DiffForm::d_coord(chart, Coord::Theta)?;
    let dphi = DiffForm::d_coord(chart, Coord::Phi)?;
    dtheta.scale(&Expr::atom(Atom::CosPsi)).add(
        &dphi.scale(&Expr::atom(Atom::SinTheta).mul(&Expr::atom(Atom::SinPsi))),
    )
}

/// The invariant coframe (sigma_z, sigma_x, sigma_y), its dual fields
/// (e1', e2', e3') and the structure constants of the commutation relations
/// [e1',e2'] = e3', [e3',e1'] = e2', [e2',e3'] = e1'.
pub struct InvariantFrame {
    pub chart: Chart,
    /// ordered as (sigma_z, sigma_x, sigma_y)
    pub coframe: [DiffForm; 3],
    pub dual: [VecField; 3],
    /// c[k][i][j] with [e_i, e_j] = sum_k c[k][i][j] e_k
    pub constants: [[[i64; 3]; 3]; 3],
}

pub fn invariant_frame() -> Result<InvariantFrame> {
    let ch = Chart::orbit3();
    let coframe = [sigma_z(&ch)?, sigma_x(&ch)?, sigma_y(&ch)?];
    // invert the coefficient matrix to get the dual vectors
    let m: Vec<Vec<Expr>> = coframe
        .iter()
        .map(|f| (0..3).map(|i| f.coeff(&[i as u8])).collect())
        .collect();
    let det = crate::forms::det_matrix(&m);
    if det.is_zero() {
        return Err(Error::SingularCoframe);
    }
    let mut dual = Vec::new();
    for a in 0..3usize {
        let mut comps = Vec::new();
        for i in 0..3usize {
            let mut minor = Vec::new();
            for r in 0..3 {
                if r == a {
                    continue;
                }
                let mut row = Vec::new();
                for c in 0..3 {
                    if c == i {
                        continue;
                    }
                    row.push(m[r][c].clone());
                }
                minor.push(row);
            }
            let mut cof = crate::forms::det_matrix(&minor);
            if (a + i) % 2 == 1 {
                cof = cof.neg();
            }
            comps.push(cof.div(&det)?);
        }
        dual.push(VecField::from_components(&ch, comps));
    }
    let mut constants = [[[0i64; 3]; 3]; 3];
    // [e1,e2]=e3, [e3,e1]=e2, [e2,e3]=e1 in 0-based indices
    constants[2][0][1] = 1;
    constants[2][1][0] = -1;
    constants[1][2][0] = 1;
    constants[1][0][2] = -1;
    constants[0][1][2] = 1;
    constants[0][2][1] = -1;
    Ok(InvariantFrame {
        chart: ch,
        coframe,
        dual: [dual[0].clone(), dual[1].clone(), dual[2].clone()],
        constants,
    })
}

/// The four Killing fields on the Euler chart: xi_0 = d/dpsi and the three
/// right-invariant fields.
pub fn killing_fields(chart: &Chart) -> Result<[VecField; 4]> {
    let zero = Expr::zero;
    let sin_phi = Expr::atom(Atom::SinPhi);
    let cos_phi = Expr::atom(Atom::CosPhi);
    let cot_theta = Expr::atom(Atom::CosTheta).div(&Expr::atom(Atom::SinTheta))?;
    let csc_theta = Expr::one().div(&Expr::atom(Atom::SinTheta))?;

    let ipsi = chart
        .index_of(Coord::Psi)
        .ok_or_else(|| Error::BasisMismatch("chart lacks psi".into()))?;
    let itheta = chart.index_of(Coord::Theta).unwrap();
    let iphi = chart.index_of(Coord::Phi).unwrap();
    let dim = chart.dim();

    let build = |psi_c: Expr, theta_c: Expr, phi_c: Expr| {
        let mut comps = vec![zero(); dim];
        comps[ipsi] = psi_c;
        comps[itheta] = theta_c;
        comps[iphi] = phi_c;
        VecField::from_components(chart, comps)
    };

    let xi0 = build(Expr::one(), zero(), zero());
    let xi1 = build(
        csc_theta.mul(&cos_phi),
        sin_phi.neg(),
        cot_theta.mul(&cos_phi).neg(),
    );
    let xi2 = build(
        csc_theta.mul(&sin_phi),
        cos_phi.clone(),
        cot_theta.mul(&sin_phi).neg(),
    );
    let xi3 = build(zero(), zero(), Expr::one());
    Ok([xi0, xi1, xi2, xi3])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    TaubNut,
    /// psi' extension (cross term +2(2l) sigma dr)
    ExtensionPrime,
    /// psi'' extension (cross term -2(2l) sigma dr)
    ExtensionSecond,
    /// the formal family with eps = +1 (spacelike orbits) or -1 (timelike)
    Generalized {
        eps: i8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitType {
    /// f < 0: spacelike orbits between the horizons
    Taub,
    /// f > 0: timelike orbits outside the horizons
    Nut,
    Horizon,
}

#[derive(Debug, Clone)]
pub struct SpacetimeModel {
    pub name: String,
    pub chart: Chart,
    pub metric: SymTensor2,
    pub m: Expr,
    pub l: Expr,
    pub lens_n: u32,
    pub branch: Branch,
}

impl SpacetimeModel {
    pub fn psi_period(&self) -> String {
        format!("4*pi/{}", self.lens_n)
    }

    pub fn killing(&self) -> Result<[VecField; 4]> {
        killing_fields(&self.chart)
    }

    /// Sign of f at a rational radius, deciding the orbit type there.
    pub fn orbit_type_at(&self, r: &BigRational, bits: u32) -> Result<OrbitType> {
        let f = f_of(&self.m, &self.l)?;
        let mut p = Point::new();
        p.set(Atom::R, r.clone());
        let v = f.eval(&p, bits)?;
        if v.is_positive() {
            Ok(OrbitType::Nut)
        } else if v.is_negative() {
            Ok(OrbitType::Taub)
        } else {
            Ok(OrbitType::Horizon)
        }
    }
}

fn check_params(m: &Expr, l: &Expr, n: u32) -> Result<()> {
    if l.is_zero() {
        return Err(Error::ParameterDomain("NUT parameter l must be nonzero".into()));
    }
    let _ = m;
    if n < 1 {
        return Err(Error::ParameterDomain("lens index n must be at least 1".into()));
    }
    Ok(())
}

/// f(r) = (r^2 - 2 m r - l^2)/(r^2 + l^2) for given parameter expressions.
pub fn f_of(m: &Expr, l: &Expr) -> Result<Expr> {
    let mut bind = BTreeMap::new();
    bind.insert(Atom::M, m.clone());
    bind.insert(Atom::L, l.clone());
    concrete_f().substitute(&bind)
}

/// Metric of Eq-type g = -4 l^2 f sigma_z^2 + dr^2/f + (r^2+l^2) d-Omega^2
/// for an arbitrary scalar f (formal or concrete) and NUT parameter l.
fn taub_nut_metric_with(chart: &Chart, f: &Expr, l: &Expr) -> Result<SymTensor2> {
    let r = Expr::atom(Atom::R);
    let sz = sigma_z(chart)?;
    let dr = DiffForm::d_coord(chart, Coord::R)?;
    let dtheta = DiffForm::d_coord(chart, Coord::Theta)?;
    let dphi = DiffForm::d_coord(chart, Coord::Phi)?;
    let four_l2_f = f.mul(&l.mul(l)).scale(4, 1);
    let r2l2 = r.mul(&r).add(&l.mul(l));

    let mut g = SymTensor2::square(&sz)?.scale(&four_l2_f.neg());
    g = g.add(&SymTensor2::square(&dr)?.scale(&Expr::one().div(f)?));
    g = g.add(&SymTensor2::square(&dtheta)?.scale(&r2l2));
    let sin2 = Expr::atom(Atom::SinTheta).pow(2)?;
    g = g.add(&SymTensor2::square(&dphi)?.scale(&r2l2.mul(&sin2)));
    Ok(g)
}

/// The Taub-NUT model on R x S^3 (or R x L(n,1)).
pub fn taub_nut(m: Expr, l: Expr, n: u32) -> Result<SpacetimeModel> {
    check_params(&m, &l, n)?;
    let chart = Chart::euler4();
    let f = f_of(&m, &l)?;
    let metric = taub_nut_metric_with(&chart, &f, &l)?;
    Ok(SpacetimeModel {
        name: "taub-nut".into(),
        chart,
        metric,
        m,
        l,
        lens_n: n,
        branch: Branch::TaubNut,
    })
}

/// Horizon-regular extension; `second` picks the psi'' branch with the
/// opposite cross term. The metric has no 1/f term.
pub fn extension(second: bool, m: Expr, l: Expr, n: u32) -> Result<SpacetimeModel> {
    check_params(&m, &l, n)?;
    let chart = Chart::extension4(second);
    let f = f_of(&m, &l)?;
    let metric = extension_metric_with(&chart, &f, &l, second)?;
    Ok(SpacetimeModel {
        name: if second { "taub-nut-ext-psi2" } else { "taub-nut-ext-psi1" }.into(),
        chart,
        metric,
        m,
        l,
        lens_n: n,
        branch: if second { Branch::ExtensionSecond } else { Branch::ExtensionPrime },
    })
}

/// Extension metric for an arbitrary f: -4 l^2 f sigma^2 +- 2(2l) sigma dr
/// + (r^2+l^2) d-Omega^2.
pub fn extension_metric_with(
    chart: &Chart,
    f: &Expr,
    l: &Expr,
    second: bool,
) -> Result<SymTensor2> {
    let r = Expr::atom(Atom::R);
    let sz = sigma_z(chart)?;
    let dr = DiffForm::d_coord(chart, Coord::R)?;
    let dtheta = DiffForm::d_coord(chart, Coord::Theta)?;
    let dphi = DiffForm::d_coord(chart, Coord::Phi)?;
    let four_l2_f = f.mul(&l.mul(l)).scale(4, 1);
    let r2l2 = r.mul(&r).add(&l.mul(l));

    let mut g = SymTensor2::square(&sz)?.scale(&four_l2_f.neg());
    let cross = SymTensor2::sym_prod2(&sz, &dr)?.scale(&l.scale(2, 1));
    g = if second { g.sub(&cross) } else { g.add(&cross) };
    g = g.add(&SymTensor2::square(&dtheta)?.scale(&r2l2));
    let sin2 = Expr::atom(Atom::SinTheta).pow(2)?;
    g = g.add(&SymTensor2::square(&dphi)?.scale(&r2l2.mul(&sin2)));
    Ok(g)
}

/// The generalized family metric -eps A^2 dr^2 + eps B^2 sigma_z^2
/// + R^2 (dtheta^2 + sin^2 dphi^2) with formal A, B, R.
pub fn generalized_family(eps: i8) -> Result<SpacetimeModel> {
    if eps != 1 && eps != -1 {
        return Err(Error::ParameterDomain("eps must be +1 or -1".into()));
    }
    let chart = Chart::euler4();
    let tet = family_tetrad(eps)?;
    let metric = tet.induced_metric()?;
    Ok(SpacetimeModel {
        name: format!("generalized-family-eps{eps:+}"),
        chart,
        metric,
        m: Expr::atom(Atom::M),
        l: Expr::atom(Atom::L),
        lens_n: 1,
        branch: Branch::Generalized { eps },
    })
}

/// The case tetrad of the generalized family. For eps = +1 (spacelike
/// orbits) the timelike leg is A dr; for eps = -1 it is B sigma_z.
pub fn family_tetrad(eps: i8) -> Result<Tetrad> {
    let chart = Chart::euler4();
    let dr = DiffForm::d_coord(&chart, Coord::R)?;
    let dtheta = DiffForm::d_coord(&chart, Coord::Theta)?;
    let dphi = DiffForm::d_coord(&chart, Coord::Phi)?;
    let sz = sigma_z(&chart)?;
    let a = Expr::atom(Atom::A);
    let b = Expr::atom(Atom::B);
    let rr = Expr::atom(Atom::RFn);
    let sin = Expr::atom(Atom::SinTheta);
    let legs = if eps == 1 {
        [
            dr.scale(&a),
            sz.scale(&b),
            dtheta.scale(&rr),
            dphi.scale(&rr.mul(&sin)),
        ]
    } else {
        [
            sz.scale(&b),
            dr.scale(&a),
            dtheta.scale(&rr),
            dphi.scale(&rr.mul(&sin)),
        ]
    };
    Tetrad::new(chart, legs, [-1, 1, 1, 1])
}

/// The orthonormal tetrad of the NUT regions, for the symbolic Taub-NUT
/// model (parameters m, l as atoms):
///   th^0 = 2 l w sigma_z, th^1 = (1/w) dr,
///   th^2 = u d theta, th^3 = u sin theta d phi,
/// with w = sqrt(f) and u = sqrt(r^2 + l^2).
pub fn nut_tetrad() -> Result<Tetrad> {
    let chart = Chart::euler4();
    let dr = DiffForm::d_coord(&chart, Coord::R)?;
    let dtheta = DiffForm::d_coord(&chart, Coord::Theta)?;
    let dphi = DiffForm::d_coord(&chart, Coord::Phi)?;
    let sz = sigma_z(&chart)?;
    let w = Expr::atom(Atom::RadW);
    let u = Expr::atom(Atom::RadU);
    let l = Expr::atom(Atom::L);
    let sin = Expr::atom(Atom::SinTheta);
    let legs = [
        sz.scale(&w.mul(&l).scale(2, 1)),
        dr.scale(&w.recip()?),
        dtheta.scale(&u),
        dphi.scale(&u.mul(&sin)),
    ];
    Tetrad::new(chart, legs, [-1, 1, 1, 1])
}

pub fn horizon_exprs() -> (Expr, Expr) {
    let m = Expr::atom(Atom::M);
    let t = Expr::atom(Atom::RadT);
    (m.add(&t), m.sub(&t))
}

/// The canonical orbit metric eps a^2 sigma_z^2 + b^2 (sigma_x^2+sigma_y^2)
/// on the three-dimensional orbit chart.
pub fn canonical_orbit_metric(eps: i8, a: &Expr, b: &Expr) -> Result<SymTensor2> {
    let ch = Chart::orbit3();
    let sz = sigma_z(&ch)?;
    let sx = sigma_x(&ch)?;
    let sy = sigma_y(&ch)?;
    let mut g = SymTensor2::square(&sz)?.scale(&a.mul(a).scale(eps as i64, 1));
    let xy = SymTensor2::square(&sx)?.add(&SymTensor2::square(&sy)?);
    g = g.add(&xy.scale(&b.mul(b)));
    Ok(g)
}

/// The same metric in the displayed Euler form
/// eps a^2 (dpsi + cos dphi)^2 + b^2 (dtheta^2 + sin^2 dphi^2).
pub fn canonical_orbit_metric_euler(eps: i8, a: &Expr, b: &Expr) -> Result<SymTensor2> {
    let ch = Chart::orbit3();
    let sz = sigma_z(&ch)?;
    let dtheta = DiffForm::d_coord(&ch, Coord::Theta)?;
    let dphi = DiffForm::d_coord(&ch, Coord::Phi)?;
    let mut g = SymTensor2::square(&sz)?.scale(&a.mul(a).scale(eps as i64, 1));
    let sin2 = Expr::atom(Atom::SinTheta).pow(2)?;
    let ang = SymTensor2::square(&dtheta)?.add(&SymTensor2::square(&dphi)?.scale(&sin2));
    g = g.add(&ang.scale(&b.mul(b)));
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_structure_identities() {
        let ch = Chart::orbit3();
        let (sx, sy, sz) = (sigma_x(&ch).unwrap(), sigma_y(&ch).unwrap(), sigma_z(&ch).unwrap());
        // d sigma_z = -sigma_x ^ sigma_y and cyclic
        let r1 = sz.ext_d().unwrap().add(&sx.wedge(&sy).unwrap()).unwrap();
        assert!(r1.is_zero());
        let r2 = sx.ext_d().unwrap().add(&sy.wedge(&sz).unwrap()).unwrap();
        assert!(r2.is_zero());
        let r3 = sy.ext_d().unwrap().add(&sz.wedge(&sx).unwrap()).unwrap();
        assert!(r3.is_zero());
    }

    #[test]
    fn sigma_xy_sum_is_round_metric() {
        let ch = Chart::orbit3();
        let sx = sigma_x(&ch).unwrap();
        let sy = sigma_y(&ch).unwrap();
        let lhs = SymTensor2::square(&sx)
            .unwrap()
            .add(&SymTensor2::square(&sy).unwrap());
        let dtheta = DiffForm::d_coord(&ch, Coord::Theta).unwrap();
        let dphi = DiffForm::d_coord(&ch, Coord::Phi).unwrap();
        let sin2 = Expr::atom(Atom::SinTheta).pow(2).unwrap();
        let rhs = SymTensor2::square(&dtheta)
            .unwrap()
            .add(&SymTensor2::square(&dphi).unwrap().scale(&sin2));
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn invariant_frame_duality_and_commutators() {
        let fr = invariant_frame().unwrap();
        // <sigma_i, e_j> = delta_ij
        for i in 0..3 {
            for j in 0..3 {
                let pairing = fr.coframe[i].interior(&fr.dual[j]).unwrap().coeff(&[]);
                let want = if i == j { Expr::one() } else { Expr::zero() };
                assert_eq!(pairing, want, "pairing ({i},{j})");
            }
        }
        // e_1' is d/dpsi
        let dpsi = VecField::partial(&fr.chart, Coord::Psi).unwrap();
        assert!(fr.dual[0].sub(&dpsi).is_zero());
        // [e_i, e_j] = c^k_{ij} e_k
        for i in 0..3 {
            for j in 0..3 {
                let bracket = fr.dual[i].lie_bracket(&fr.dual[j]).unwrap();
                let mut want = VecField::zero(&fr.chart);
                for k in 0..3 {
                    if fr.constants[k][i][j] != 0 {
                        want = want.add(&fr.dual[k].scale(&Expr::int(fr.constants[k][i][j])));
                    }
                }
                assert!(bracket.sub(&want).is_zero(), "bracket ({i},{j})");
            }
        }
    }

    #[test]
    fn taub_nut_determinant_and_tetrad() {
        let model = taub_nut(Expr::atom(Atom::M), Expr::atom(Atom::L), 1).unwrap();
        let l = Expr::atom(Atom::L);
        let r = Expr::atom(Atom::R);
        let r2l2 = r.mul(&r).add(&l.mul(&l));
        let want = l
            .mul(&l)
            .scale(-4, 1)
            .mul(&r2l2.pow(2).unwrap())
            .mul(&Expr::atom(Atom::SinTheta).pow(2).unwrap());
        assert_eq!(model.metric.det(), want);
        // the NUT tetrad induces exactly this metric
        let t = nut_tetrad().unwrap();
        assert!(t.induced_metric().unwrap().sub(&model.metric).is_zero());
    }

    #[test]
    fn extension_determinant_regular() {
        let model = extension(false, Expr::atom(Atom::M), Expr::atom(Atom::L), 1).unwrap();
        let l = Expr::atom(Atom::L);
        let r = Expr::atom(Atom::R);
        let r2l2 = r.mul(&r).add(&l.mul(&l));
        // -(2l)^2 (r^2+l^2)^2 sin^2
        let want = l
            .mul(&l)
            .scale(-4, 1)
            .mul(&r2l2.pow(2).unwrap())
            .mul(&Expr::atom(Atom::SinTheta).pow(2).unwrap());
        assert_eq!(model.metric.det(), want);
        // no 1/f anywhere: g_rr = 0
        assert!(model.metric.comps[0][0].is_zero());
    }

    #[test]
    fn horizons_numeric() {
        // m = 3, l = 4: r+ = 8, r- = -2
        let (rp, rm) = horizon_exprs();
        let mut bind = BTreeMap::new();
        bind.insert(Atom::M, Expr::int(3));
        bind.insert(Atom::L, Expr::int(4));
        assert_eq!(rp.substitute(&bind).unwrap(), Expr::int(8));
        assert_eq!(rm.substitute(&bind).unwrap(), Expr::int(-2));
    }

    #[test]
    fn orbit_metric_expansion_equality() {
        let a = Expr::atom(Atom::A);
        let b = Expr::atom(Atom::B);
        for eps in [1i8, -1] {
            let lhs = canonical_orbit_metric(eps, &a, &b).unwrap();
            let rhs = canonical_orbit_metric_euler(eps, &a, &b).unwrap();
            assert!(lhs.sub(&rhs).is_zero());
        }
    }

    #[test]
    fn parameter_domain_enforced() {
        assert!(matches!(
            taub_nut(Expr::one(), Expr::zero(), 1),
            Err(Error::ParameterDomain(_))
        ));
        assert!(matches!(
            taub_nut(Expr::one(), Expr::one(), 0),
            Err(Error::ParameterDomain(_))
        ));
    }
}
