//! Charts, differential forms, vector fields, and symmetric 2-tensors.
//!
//! Forms are stored sparsely: a map from strictly increasing index tuples to
//! coefficients. A missing tuple is a zero coefficient. Coefficients live in
//! the exact scalar field, so every operator here is exact.

use crate::atom::Coord;
use crate::error::{Error, Result};
use crate::expr::Expr;
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;

/// An ordered coordinate chart; the listed order fixes the orientation.
#[derive(Debug, Clone)]
pub struct Chart {
    pub coords: Vec<Coord>,
    pub names: Vec<&'static str>,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}
impl Eq for Chart {}

impl Chart {
    /// The Euler chart (r, psi, theta, phi).
    pub fn euler4() -> Chart {
        Chart {
            coords: vec![Coord::R, Coord::Psi, Coord::Theta, Coord::Phi],
            names: vec!["r", "psi", "theta", "phi"],
        }
    }

    /// The Euler chart with the shifted angle of a horizon extension.
    pub fn extension4(second: bool) -> Chart {
        Chart {
            coords: vec![Coord::R, Coord::Psi, Coord::Theta, Coord::Phi],
            names: vec![
                "r",
                if second { "psi''" } else { "psi'" },
                "theta",
                "phi",
            ],
        }
    }

    /// The chart in the transformed radial coordinate r'.
    pub fn nut4() -> Chart {
        Chart {
            coords: vec![Coord::RPrime, Coord::Psi, Coord::Theta, Coord::Phi],
            names: vec!["r'", "psi", "theta", "phi"],
        }
    }

    /// The three-dimensional orbit chart (psi, theta, phi).
    pub fn orbit3() -> Chart {
        Chart {
            coords: vec![Coord::Psi, Coord::Theta, Coord::Phi],
            names: vec!["psi", "theta", "phi"],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index_of(&self, c: Coord) -> Option<usize> {
        self.coords.iter().position(|&x| x == c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Coordinate,
    Frame,
}

pub type IdxTuple = SmallVec<[u8; 4]>;

/// Sign of merging two strictly increasing tuples; None if they collide.
fn merge_tuples(a: &IdxTuple, b: &IdxTuple) -> Option<(IdxTuple, i8)> {
    let mut out: IdxTuple = SmallVec::new();
    let mut sign = 1i8;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining a-elements
            if (a.len() - i) % 2 == 1 {
                sign = -sign;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    while i < a.len() {
        out.push(a[i]);
        i += 1;
    }
    while j < b.len() {
        out.push(b[j]);
        j += 1;
    }
    Some((out, sign))
}

/// Insert an index into a strictly increasing tuple, with the sign of moving
/// it from the front to its slot. None if already present.
fn insert_index(idx: u8, t: &IdxTuple) -> Option<(IdxTuple, i8)> {
    let single: IdxTuple = SmallVec::from_slice(&[idx]);
    merge_tuples(&single, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffForm {
    pub chart: Chart,
    pub basis: Basis,
    pub degree: u8,
    pub coeffs: BTreeMap<IdxTuple, Expr>,
}

impl DiffForm {
    pub fn zero(chart: &Chart, basis: Basis, degree: u8) -> DiffForm {
        DiffForm {
            chart: chart.clone(),
            basis,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: &Chart, e: Expr) -> DiffForm {
        let mut f = DiffForm::zero(chart, Basis::Coordinate, 0);
        f.set(SmallVec::new(), e);
        f
    }

    /// The coordinate differential d(coord).
    pub fn d_coord(chart: &Chart, c: Coord) -> Result<DiffForm> {
        let i = chart
            .index_of(c)
            .ok_or_else(|| Error::BasisMismatch(format!("{} not in chart", c.name())))?;
        let mut f = DiffForm::zero(chart, Basis::Coordinate, 1);
        f.set(SmallVec::from_slice(&[i as u8]), Expr::one());
        Ok(f)
    }

    /// A frame basis one-form (a tetrad leg by index).
    pub fn frame_leg(chart: &Chart, a: u8) -> DiffForm {
        let mut f = DiffForm::zero(chart, Basis::Frame, 1);
        f.set(SmallVec::from_slice(&[a]), Expr::one());
        f
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn set(&mut self, t: IdxTuple, e: Expr) {
        debug_assert!(t.len() == self.degree as usize);
        debug_assert!(t.windows(2).all(|w| w[0] < w[1]));
        if e.is_zero() {
            self.coeffs.remove(&t);
        } else {
            self.coeffs.insert(t, e);
        }
    }

    pub fn coeff(&self, t: &[u8]) -> Expr {
        self.coeffs
            .get(&SmallVec::from_slice(t))
            .cloned()
            .unwrap_or_else(Expr::zero)
    }

    fn accumulate(&mut self, t: IdxTuple, e: Expr) {
        if e.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&t).unwrap_or_else(Expr::zero);
        let sum = cur.add(&e);
        if !sum.is_zero() {
            self.coeffs.insert(t, sum);
        }
    }

    fn compatible(&self, o: &DiffForm) -> Result<()> {
        if self.chart != o.chart {
            return Err(Error::BasisMismatch("different charts".into()));
        }
        if self.basis != o.basis {
            return Err(Error::BasisMismatch(
                "mixing coordinate and frame bases".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, o: &DiffForm) -> Result<DiffForm> {
        self.compatible(o)?;
        if self.degree != o.degree {
            return Err(Error::DegreeError("adding forms of different degree".into()));
        }
        let mut out = self.clone();
        for (t, e) in &o.coeffs {
            out.accumulate(t.clone(), e.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &DiffForm) -> Result<DiffForm> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> DiffForm {
        DiffForm {
            chart: self.chart.clone(),
            basis: self.basis,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(t, e)| (t.clone(), e.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Expr) -> DiffForm {
        if s.is_zero() {
            return DiffForm::zero(&self.chart, self.basis, self.degree);
        }
        DiffForm {
            chart: self.chart.clone(),
            basis: self.basis,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(t, e)| (t.clone(), e.mul(s)))
                .collect(),
        }
    }

    /// Graded exterior product.
    pub fn wedge(&self, o: &DiffForm) -> Result<DiffForm> {
        self.compatible(o)?;
        let degree = self.degree + o.degree;
        let mut out = DiffForm::zero(&self.chart, self.basis, degree);
        if degree as usize > self.chart.dim() && self.basis == Basis::Coordinate {
            return Ok(out);
        }
        if degree > 4 {
            return Ok(out);
        }
        for (ta, ea) in &self.coeffs {
            for (tb, eb) in &o.coeffs {
                if let Some((t, sign)) = merge_tuples(ta, tb) {
                    let mut e = ea.mul(eb);
                    if sign < 0 {
                        e = e.neg();
                    }
                    out.accumulate(t, e);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative (coordinate basis).
    pub fn ext_d(&self) -> Result<DiffForm> {
        if self.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch(
                "exterior derivative acts on coordinate-basis forms".into(),
            ));
        }
        let mut out = DiffForm::zero(&self.chart, Basis::Coordinate, self.degree + 1);
        for (t, e) in &self.coeffs {
            for (j, &coord) in self.chart.coords.iter().enumerate() {
                let de = e.diff(coord)?;
                if de.is_zero() {
                    continue;
                }
                if let Some((nt, sign)) = insert_index(j as u8, t) {
                    out.accumulate(nt, if sign < 0 { de.neg() } else { de });
                }
            }
        }
        Ok(out)
    }

    /// Interior product with a vector field (coordinate basis).
    pub fn interior(&self, x: &VecField) -> Result<DiffForm> {
        if self.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch(
                "interior product acts on coordinate-basis forms".into(),
            ));
        }
        if self.chart != x.chart {
            return Err(Error::BasisMismatch("different charts".into()));
        }
        if self.degree == 0 {
            return Err(Error::DegreeError(
                "interior product of a 0-form".into(),
            ));
        }
        let mut out = DiffForm::zero(&self.chart, Basis::Coordinate, self.degree - 1);
        for (t, e) in &self.coeffs {
            for (p, &i) in t.iter().enumerate() {
                let comp = &x.comps[i as usize];
                if comp.is_zero() {
                    continue;
                }
                let mut rest: IdxTuple = t.clone();
                rest.remove(p);
                let mut term = e.mul(comp);
                if p % 2 == 1 {
                    term = term.neg();
                }
                out.accumulate(rest, term);
            }
        }
        Ok(out)
    }

    /// Lie derivative by Cartan's magic formula.
    pub fn lie(&self, x: &VecField) -> Result<DiffForm> {
        let d_self = self.ext_d()?;
        let term1 = d_self.interior(x)?;
        if self.degree == 0 {
            return Ok(term1);
        }
        let term2 = self.interior(x)?.ext_d()?;
        term1.add(&term2)
    }

    /// Hodge star in an orthonormal frame with signature eta and the
    /// orientation given by the frame order times `orientation_sign`.
    pub fn hodge_frame(&self, eta: &[i8; 4], orientation_sign: i8) -> Result<DiffForm> {
        if self.basis != Basis::Frame {
            return Err(Error::BasisMismatch(
                "the frame Hodge star needs a frame-basis form".into(),
            ));
        }
        let mut out = DiffForm::zero(&self.chart, Basis::Frame, 4 - self.degree);
        for (t, e) in &self.coeffs {
            let mut comp: IdxTuple = SmallVec::new();
            for i in 0..4u8 {
                if !t.contains(&i) {
                    comp.push(i);
                }
            }
            // permutation sign of (t, comp) relative to (0,1,2,3)
            let mut perm: Vec<u8> = t.iter().copied().chain(comp.iter().copied()).collect();
            let mut sign = 1i64;
            for i in 0..perm.len() {
                for j in i + 1..perm.len() {
                    if perm[i] > perm[j] {
                        sign = -sign;
                        perm.swap(i, j);
                    }
                }
            }
            for &i in t.iter() {
                sign *= eta[i as usize] as i64;
            }
            sign *= orientation_sign as i64;
            let term = if sign < 0 { e.neg() } else { e.clone() };
            out.accumulate(comp, term);
        }
        Ok(out)
    }

    /// Drop every term containing the given coordinate's differential — the
    /// restriction of the form to a level surface of that coordinate.
    pub fn restrict_drop(&self, c: Coord) -> Result<DiffForm> {
        if self.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch("restriction needs coordinates".into()));
        }
        let i = self
            .chart
            .index_of(c)
            .ok_or_else(|| Error::BasisMismatch("coordinate not in chart".into()))? as u8;
        let mut out = DiffForm::zero(&self.chart, Basis::Coordinate, self.degree);
        for (t, e) in &self.coeffs {
            if !t.contains(&i) {
                out.accumulate(t.clone(), e.clone());
            }
        }
        Ok(out)
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, e) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let basis: Vec<String> = t
                .iter()
                .map(|&i| match self.basis {
                    Basis::Coordinate => format!("d {}", self.chart.names[i as usize]),
                    Basis::Frame => format!("th^{i}"),
                })
                .collect();
            if t.is_empty() {
                write!(f, "{e}")?;
            } else {
                write!(f, "({e}) {}", basis.join("^"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecField {
    pub chart: Chart,
    pub comps: Vec<Expr>,
}

impl VecField {
    pub fn zero(chart: &Chart) -> VecField {
        VecField {
            chart: chart.clone(),
            comps: vec![Expr::zero(); chart.dim()],
        }
    }

    /// The coordinate vector field along `c`.
    pub fn partial(chart: &Chart, c: Coord) -> Result<VecField> {
        let i = chart
            .index_of(c)
            .ok_or_else(|| Error::BasisMismatch(format!("{} not in chart", c.name())))?;
        let mut v = VecField::zero(chart);
        v.comps[i] = Expr::one();
        Ok(v)
    }

    pub fn from_components(chart: &Chart, comps: Vec<Expr>) -> VecField {
        assert_eq!(comps.len(), chart.dim());
        VecField { chart: chart.clone(), comps }
    }

    pub fn add(&self, o: &VecField) -> VecField {
        VecField {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale(&self, s: &Expr) -> VecField {
        VecField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn neg(&self) -> VecField {
        VecField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(Expr::neg).collect(),
        }
    }

    pub fn sub(&self, o: &VecField) -> VecField {
        self.add(&o.neg())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Commutator [self, other].
    pub fn lie_bracket(&self, o: &VecField) -> Result<VecField> {
        if self.chart != o.chart {
            return Err(Error::BasisMismatch("different charts".into()));
        }
        let n = self.chart.dim();
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Expr::zero();
            for j in 0..n {
                let cj = self.chart.coords[j];
                let t1 = self.comps[j].mul(&o.comps[i].diff(cj)?);
                let t2 = o.comps[j].mul(&self.comps[i].diff(cj)?);
                acc = acc.add(&t1.sub(&t2));
            }
            comps.push(acc);
        }
        Ok(VecField { chart: self.chart.clone(), comps })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    pub chart: Chart,
    pub comps: Vec<Vec<Expr>>,
}

impl SymTensor2 {
    pub fn zero(chart: &Chart) -> SymTensor2 {
        let n = chart.dim();
        SymTensor2 {
            chart: chart.clone(),
            comps: vec![vec![Expr::zero(); n]; n],
        }
    }

    /// alpha ⊗ alpha for a one-form.
    pub fn square(alpha: &DiffForm) -> Result<SymTensor2> {
        SymTensor2::sym_prod2(alpha, alpha).map(|t| t.scale(&Expr::rational(1, 2)))
    }

    /// alpha ⊗ beta + beta ⊗ alpha.
    pub fn sym_prod2(alpha: &DiffForm, beta: &DiffForm) -> Result<SymTensor2> {
        if alpha.degree != 1 || beta.degree != 1 {
            return Err(Error::DegreeError("symmetric product needs one-forms".into()));
        }
        if alpha.basis != Basis::Coordinate || beta.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch("symmetric product needs coordinates".into()));
        }
        let n = alpha.chart.dim();
        let mut out = SymTensor2::zero(&alpha.chart);
        for i in 0..n {
            for j in 0..n {
                let a_i = alpha.coeff(&[i as u8]);
                let b_j = beta.coeff(&[j as u8]);
                let a_j = alpha.coeff(&[j as u8]);
                let b_i = beta.coeff(&[i as u8]);
                out.comps[i][j] = a_i.mul(&b_j).add(&a_j.mul(&b_i));
            }
        }
        Ok(out)
    }

    pub fn add(&self, o: &SymTensor2) -> SymTensor2 {
        let n = self.chart.dim();
        let mut out = SymTensor2::zero(&self.chart);
        for i in 0..n {
            for j in 0..n {
                out.comps[i][j] = self.comps[i][j].add(&o.comps[i][j]);
            }
        }
        out
    }

    pub fn sub(&self, o: &SymTensor2) -> SymTensor2 {
        self.add(&o.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, s: &Expr) -> SymTensor2 {
        SymTensor2 {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .map(|row| row.iter().map(|e| e.mul(s)).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|row| row.iter().all(Expr::is_zero))
    }

    pub fn det(&self) -> Expr {
        det_matrix(&self.comps)
    }

    /// Inverse via the adjugate; error when the determinant vanishes.
    pub fn inverse(&self) -> Result<Vec<Vec<Expr>>> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMetric);
        }
        let n = self.chart.dim();
        let mut inv = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let minor = minor_matrix(&self.comps, i, j);
                let mut c = det_matrix(&minor);
                if (i + j) % 2 == 1 {
                    c = c.neg();
                }
                // adjugate transpose
                inv[j][i] = c.div(&det)?;
            }
        }
        Ok(inv)
    }

    /// Pull back along a linear differential substitution dx^a = J^a_b dy^b.
    pub fn pullback(&self, jac: &[Vec<Expr>]) -> SymTensor2 {
        let n = self.chart.dim();
        let mut out = SymTensor2::zero(&self.chart);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Expr::zero();
                for c in 0..n {
                    for d in 0..n {
                        let t = jac[c][a].mul(&jac[d][b]).mul(&self.comps[c][d]);
                        acc = acc.add(&t);
                    }
                }
                out.comps[a][b] = acc;
            }
        }
        out
    }

    /// Lie derivative along a vector field.
    pub fn lie(&self, x: &VecField) -> Result<SymTensor2> {
        if self.chart != x.chart {
            return Err(Error::BasisMismatch("different charts".into()));
        }
        let n = self.chart.dim();
        let mut out = SymTensor2::zero(&self.chart);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Expr::zero();
                for c in 0..n {
                    let coord_c = self.chart.coords[c];
                    acc = acc.add(&x.comps[c].mul(&self.comps[a][b].diff(coord_c)?));
                    acc = acc.add(
                        &self.comps[c][b].mul(&x.comps[c].diff(self.chart.coords[a])?),
                    );
                    acc = acc.add(
                        &self.comps[a][c].mul(&x.comps[c].diff(self.chart.coords[b])?),
                    );
                }
                out.comps[a][b] = acc;
            }
        }
        Ok(out)
    }
}

pub fn det_matrix(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Expr::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor = minor_matrix(m, 0, j);
        let mut term = m[0][j].mul(&det_matrix(&minor));
        if j % 2 == 1 {
            term = term.neg();
        }
        acc = acc.add(&term);
    }
    acc
}

fn minor_matrix(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    let n = m.len();
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == row {
            continue;
        }
        let mut r = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j == col {
                continue;
            }
            r.push(m[i][j].clone());
        }
        out.push(r);
    }
    out
}

/// Verify d omega^k = -sum_{i<j} c^k_{ij} omega^i wedge omega^j for a coframe
/// triple and structure constants c[k][i][j] (antisymmetric in i, j).
/// Returns the residual forms, one per k.
pub fn dual_structure_residuals(
    omegas: &[DiffForm; 3],
    c: &[[[i64; 3]; 3]; 3],
) -> Result<Vec<DiffForm>> {
    let mut out = Vec::new();
    for k in 0..3 {
        let mut residual = omegas[k].ext_d()?;
        for i in 0..3 {
            for j in (i + 1)..3 {
                if c[k][i][j] == 0 {
                    continue;
                }
                let w = omegas[i].wedge(&omegas[j])?;
                residual = residual.add(&w.scale(&Expr::int(c[k][i][j])))?;
            }
        }
        out.push(residual);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::Atom;

    fn chart() -> Chart {
        Chart::euler4()
    }

    #[test]
    fn wedge_antisymmetry_and_bilinearity() {
        let ch = chart();
        let dr = DiffForm::d_coord(&ch, Coord::R).unwrap();
        let dpsi = DiffForm::d_coord(&ch, Coord::Psi).unwrap();
        let a = dr.add(&dpsi.scale(&Expr::atom(Atom::CosTheta))).unwrap();
        assert!(a.wedge(&a).unwrap().is_zero());
        let ab = a.wedge(&dpsi).unwrap();
        let ba = dpsi.wedge(&a).unwrap();
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn d_squared_zero() {
        let ch = chart();
        let dphi = DiffForm::d_coord(&ch, Coord::Phi).unwrap();
        let f = dphi.scale(&Expr::atom(Atom::CosTheta).mul(&Expr::atom(Atom::SinPsi)));
        let ddf = f.ext_d().unwrap().ext_d().unwrap();
        assert!(ddf.is_zero());
    }

    #[test]
    fn interior_examples() {
        let ch = chart();
        // i_{d/dpsi}(dpsi + cos(theta) dphi) = 1
        let dpsi = DiffForm::d_coord(&ch, Coord::Psi).unwrap();
        let dphi = DiffForm::d_coord(&ch, Coord::Phi).unwrap();
        let sigma_z = dpsi.add(&dphi.scale(&Expr::atom(Atom::CosTheta))).unwrap();
        let xpsi = VecField::partial(&ch, Coord::Psi).unwrap();
        let inner = sigma_z.interior(&xpsi).unwrap();
        assert_eq!(inner.coeff(&[]), Expr::one());
        // i_{d/dtheta}(sin dtheta ^ dphi) = sin dphi
        let dtheta = DiffForm::d_coord(&ch, Coord::Theta).unwrap();
        let two = dtheta
            .wedge(&dphi)
            .unwrap()
            .scale(&Expr::atom(Atom::SinTheta));
        let xtheta = VecField::partial(&ch, Coord::Theta).unwrap();
        let inner = two.interior(&xtheta).unwrap();
        assert_eq!(inner, dphi.scale(&Expr::atom(Atom::SinTheta)));
    }

    #[test]
    fn hodge_star_basics() {
        let ch = chart();
        let eta = [-1i8, 1, 1, 1];
        // *(th0^th1) = -th2^th3
        let t01 = DiffForm::frame_leg(&ch, 0).wedge(&DiffForm::frame_leg(&ch, 1)).unwrap();
        let star = t01.hodge_frame(&eta, 1).unwrap();
        let t23 = DiffForm::frame_leg(&ch, 2).wedge(&DiffForm::frame_leg(&ch, 3)).unwrap();
        assert_eq!(star, t23.neg());
        // *1 = volume form
        let one = {
            let mut f = DiffForm::zero(&ch, Basis::Frame, 0);
            f.set(SmallVec::new(), Expr::one());
            f
        };
        let vol = one.hodge_frame(&eta, 1).unwrap();
        assert_eq!(vol.coeff(&[0, 1, 2, 3]), Expr::one());
        // ** = (-1)^{k(4-k)} sign(eta) on every degree
        for k in 0..=4u8 {
            let mut legs: Vec<DiffForm> = Vec::new();
            for i in 0..k {
                legs.push(DiffForm::frame_leg(&ch, i));
            }
            let mut form = {
                let mut f = DiffForm::zero(&ch, Basis::Frame, 0);
                f.set(SmallVec::new(), Expr::one());
                f
            };
            for leg in &legs {
                form = form.wedge(leg).unwrap();
            }
            let twice = form
                .hodge_frame(&eta, 1)
                .unwrap()
                .hodge_frame(&eta, 1)
                .unwrap();
            let sign = if (k * (4 - k)) % 2 == 0 { -1 } else { 1 }; // times sign(eta) = -1
            let want = form.scale(&Expr::int(sign));
            assert_eq!(twice, want);
        }
    }

    #[test]
    fn lie_bracket_of_coordinates_vanishes() {
        let ch = chart();
        let x = VecField::partial(&ch, Coord::Theta).unwrap();
        let y = VecField::partial(&ch, Coord::Phi).unwrap();
        assert!(x.lie_bracket(&y).unwrap().is_zero());
    }
}
