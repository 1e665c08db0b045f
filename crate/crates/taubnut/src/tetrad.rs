//! Orthonormal coframes and basis conversion.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::forms::{det_matrix, Basis, Chart, DiffForm, SymTensor2};

#[derive(Debug, Clone)]
pub struct Tetrad {
    pub chart: Chart,
    /// The four coframe legs as coordinate one-forms.
    pub legs: [DiffForm; 4],
    /// Diagonal signature entries, each +1 or -1.
    pub eta: [i8; 4],
}

impl Tetrad {
    pub fn new(chart: Chart, legs: [DiffForm; 4], eta: [i8; 4]) -> Result<Tetrad> {
        for leg in &legs {
            if leg.degree != 1 || leg.basis != Basis::Coordinate {
                return Err(Error::DegreeError("tetrad legs must be coordinate one-forms".into()));
            }
            if leg.chart != chart {
                return Err(Error::BasisMismatch("tetrad leg on a different chart".into()));
            }
        }
        let t = Tetrad { chart, legs, eta };
        if t.coframe_det().is_zero() {
            return Err(Error::SingularCoframe);
        }
        Ok(t)
    }

    /// Coframe matrix: row a holds the coefficients of leg a on dx^i.
    pub fn coframe_matrix(&self) -> Vec<Vec<Expr>> {
        (0..4)
            .map(|a| {
                (0..4)
                    .map(|i| self.legs[a].coeff(&[i as u8]))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn coframe_det(&self) -> Expr {
        det_matrix(&self.coframe_matrix())
    }

    /// Inverse coframe: inv[i][a] with dx^i = sum_a inv[i][a] theta^a.
    pub fn inverse_coframe(&self) -> Result<Vec<Vec<Expr>>> {
        let m = self.coframe_matrix();
        let det = det_matrix(&m);
        if det.is_zero() {
            return Err(Error::SingularCoframe);
        }
        let n = 4;
        let mut inv = vec![vec![Expr::zero(); n]; n];
        for a in 0..n {
            for i in 0..n {
                // cofactor expansion of m (rows = frame index, cols = coord)
                let mut minor = Vec::new();
                for r in 0..n {
                    if r == a {
                        continue;
                    }
                    let mut row = Vec::new();
                    for c in 0..n {
                        if c == i {
                            continue;
                        }
                        row.push(m[r][c].clone());
                    }
                    minor.push(row);
                }
                let mut cof = det_matrix(&minor);
                if (a + i) % 2 == 1 {
                    cof = cof.neg();
                }
                inv[i][a] = cof.div(&det)?;
            }
        }
        Ok(inv)
    }

    /// Frame vectors E_a = sum_i inv[i][a] d/dx^i as component lists.
    pub fn frame_vectors(&self) -> Result<Vec<Vec<Expr>>> {
        let inv = self.inverse_coframe()?;
        Ok((0..4)
            .map(|a| (0..4).map(|i| inv[i][a].clone()).collect())
            .collect())
    }

    /// The metric sum_a eta_a (theta^a)^2.
    pub fn induced_metric(&self) -> Result<SymTensor2> {
        let mut g = SymTensor2::zero(&self.chart);
        for a in 0..4 {
            let sq = SymTensor2::square(&self.legs[a])?;
            g = g.add(&sq.scale(&Expr::int(self.eta[a] as i64)));
        }
        Ok(g)
    }

    /// Convert a coordinate-basis form to the frame basis.
    pub fn to_frame(&self, form: &DiffForm) -> Result<DiffForm> {
        if form.basis != Basis::Coordinate {
            return Err(Error::BasisMismatch("form is already frame-basis".into()));
        }
        if form.chart != self.chart {
            return Err(Error::BasisMismatch("form on a different chart".into()));
        }
        let inv = self.inverse_coframe()?;
        // dx^i expanded on the frame legs
        let expansions: Vec<DiffForm> = (0..4)
            .map(|i| {
                let mut f = DiffForm::zero(&self.chart, Basis::Frame, 1);
                for a in 0..4 {
                    if !inv[i][a].is_zero() {
                        f.set(smallvec::SmallVec::from_slice(&[a as u8]), inv[i][a].clone());
                    }
                }
                f
            })
            .collect();
        self.convert(form, Basis::Frame, &expansions)
    }

    /// Convert a frame-basis form back to coordinates.
    pub fn to_coordinate(&self, form: &DiffForm) -> Result<DiffForm> {
        if form.basis != Basis::Frame {
            return Err(Error::BasisMismatch("form is already coordinate-basis".into()));
        }
        let expansions: Vec<DiffForm> = self.legs.to_vec();
        self.convert(form, Basis::Coordinate, &expansions)
    }

    fn convert(
        &self,
        form: &DiffForm,
        target: Basis,
        expansions: &[DiffForm],
    ) -> Result<DiffForm> {
        let mut out = DiffForm::zero(&self.chart, target, form.degree);
        for (t, c) in &form.coeffs {
            let mut piece = {
                let mut f = DiffForm::zero(&self.chart, target, 0);
                f.set(smallvec::SmallVec::new(), c.clone());
                f
            };
            for &i in t.iter() {
                piece = piece.wedge(&expansions[i as usize])?;
            }
            out = out.add(&piece)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{Atom, Coord};

    /// The formal spacelike tetrad: A dr, B sigma_z, R dtheta, R sin dphi.
    fn formal_tetrad() -> Tetrad {
        let ch = Chart::euler4();
        let dr = DiffForm::d_coord(&ch, Coord::R).unwrap();
        let dpsi = DiffForm::d_coord(&ch, Coord::Psi).unwrap();
        let dtheta = DiffForm::d_coord(&ch, Coord::Theta).unwrap();
        let dphi = DiffForm::d_coord(&ch, Coord::Phi).unwrap();
        let sigma_z = dpsi.add(&dphi.scale(&Expr::atom(Atom::CosTheta))).unwrap();
        Tetrad::new(
            ch,
            [
                dr.scale(&Expr::atom(Atom::A)),
                sigma_z.scale(&Expr::atom(Atom::B)),
                dtheta.scale(&Expr::atom(Atom::RFn)),
                dphi.scale(&Expr::atom(Atom::RFn).mul(&Expr::atom(Atom::SinTheta))),
            ],
            [-1, 1, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_conversion() {
        let t = formal_tetrad();
        let ch = t.chart.clone();
        let dr = DiffForm::d_coord(&ch, Coord::R).unwrap();
        let dphi = DiffForm::d_coord(&ch, Coord::Phi).unwrap();
        let two = dr
            .wedge(&dphi)
            .unwrap()
            .scale(&Expr::atom(Atom::CosTheta).add(&Expr::atom(Atom::R)));
        let frame = t.to_frame(&two).unwrap();
        let back = t.to_coordinate(&frame).unwrap();
        assert_eq!(back, two);
    }

    #[test]
    fn induced_metric_components() {
        let t = formal_tetrad();
        let g = t.induced_metric().unwrap();
        // g_rr = -A^2, g_psi,psi = B^2, g_theta,theta = R^2
        assert_eq!(g.comps[0][0], Expr::atom(Atom::A).pow(2).unwrap().neg());
        assert_eq!(g.comps[1][1], Expr::atom(Atom::B).pow(2).unwrap());
        assert_eq!(g.comps[2][2], Expr::atom(Atom::RFn).pow(2).unwrap());
        // g_psi,phi = B^2 cos(theta)
        assert_eq!(
            g.comps[1][3],
            Expr::atom(Atom::B)
                .pow(2)
                .unwrap()
                .mul(&Expr::atom(Atom::CosTheta))
        );
    }

    #[test]
    fn singular_coframe_rejected() {
        let ch = Chart::euler4();
        let dr = DiffForm::d_coord(&ch, Coord::R).unwrap();
        let bad = Tetrad::new(
            ch.clone(),
            [dr.clone(), dr.clone(), dr.clone(), dr],
            [-1, 1, 1, 1],
        );
        assert!(matches!(bad, Err(Error::SingularCoframe)));
    }
}
