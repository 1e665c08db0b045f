//! The fixed symbol universe.
//!
//! Every scalar the engine manipulates is a rational function of a closed set
//! of atoms: the radial coordinates, the six trig atoms of the Euler angles,
//! the constants, the formal functions A, B, R, f with their derivative
//! chains, and three constrained square roots. Constrained atoms carry a
//! defining relation (`sin^2 = 1 - cos^2`, `s^2 = r^2 - c0`, ...) that the
//! canonicalizer reduces against, so equality of canonical forms decides
//! equality in the underlying function field.

use crate::error::{Error, Result};

/// Chart coordinates. The angles never appear as bare polynomial atoms;
/// they act through their sine/cosine atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    R,
    RPrime,
    Psi,
    Theta,
    Phi,
}

impl Coord {
    pub fn name(self) -> &'static str {
        match self {
            Coord::R => "r",
            Coord::RPrime => "r'",
            Coord::Psi => "psi",
            Coord::Theta => "theta",
            Coord::Phi => "phi",
        }
    }
}

/// Polynomial atoms, in the fixed variable order used by monomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Atom {
    /// radial coordinate r
    R = 0,
    /// transformed radial coordinate r'
    RPrime = 1,
    CosPsi = 2,
    SinPsi = 3,
    CosTheta = 4,
    SinTheta = 5,
    CosPhi = 6,
    SinPhi = 7,
    /// mass parameter
    M = 8,
    /// NUT parameter
    L = 9,
    /// integration constant c0
    C0 = 10,
    /// integration constant c1
    C1 = 11,
    /// the constant value of R in the constant-R branch
    RZero = 12,
    /// free multiplicative constant of a homogeneous solution
    CHom = 13,
    A = 14,
    A1 = 15,
    A2 = 16,
    B = 17,
    B1 = 18,
    B2 = 19,
    RFn = 20,
    RFn1 = 21,
    RFn2 = 22,
    F = 23,
    F1 = 24,
    /// s = sqrt(r^2 - c0)
    RadS = 25,
    /// t = sqrt(m^2 + l^2)
    RadT = 26,
    /// w = sqrt((r^2 - 2 m r - l^2)/(r^2 + l^2)), i.e. sqrt of the concrete f
    RadW = 27,
    /// u = sqrt(r^2 + l^2)
    RadU = 28,
}

pub const ATOM_COUNT: usize = 29;

pub const ALL_ATOMS: [Atom; ATOM_COUNT] = [
    Atom::R,
    Atom::RPrime,
    Atom::CosPsi,
    Atom::SinPsi,
    Atom::CosTheta,
    Atom::SinTheta,
    Atom::CosPhi,
    Atom::SinPhi,
    Atom::M,
    Atom::L,
    Atom::C0,
    Atom::C1,
    Atom::RZero,
    Atom::CHom,
    Atom::A,
    Atom::A1,
    Atom::A2,
    Atom::B,
    Atom::B1,
    Atom::B2,
    Atom::RFn,
    Atom::RFn1,
    Atom::RFn2,
    Atom::F,
    Atom::F1,
    Atom::RadS,
    Atom::RadT,
    Atom::RadW,
    Atom::RadU,
];

/// Symbol classification mirroring the engine's vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomKind {
    Coordinate,
    Trig,
    Parameter,
    FormalFunction,
    DerivativeOfFormal,
    Radical,
}

impl Atom {
    pub fn from_index(i: u8) -> Atom {
        ALL_ATOMS[i as usize]
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn kind(self) -> AtomKind {
        use Atom::*;
        match self {
            R | RPrime => AtomKind::Coordinate,
            CosPsi | SinPsi | CosTheta | SinTheta | CosPhi | SinPhi => AtomKind::Trig,
            M | L | C0 | C1 | RZero | CHom => AtomKind::Parameter,
            A | B | RFn | F => AtomKind::FormalFunction,
            A1 | A2 | B1 | B2 | RFn1 | RFn2 | F1 => AtomKind::DerivativeOfFormal,
            RadS | RadT | RadW | RadU => AtomKind::Radical,
        }
    }

    pub fn name(self) -> &'static str {
        use Atom::*;
        match self {
            R => "r",
            RPrime => "r'",
            CosPsi => "cos(psi)",
            SinPsi => "sin(psi)",
            CosTheta => "cos(theta)",
            SinTheta => "sin(theta)",
            CosPhi => "cos(phi)",
            SinPhi => "sin(phi)",
            M => "m",
            L => "l",
            C0 => "c0",
            C1 => "c1",
            RZero => "R0",
            CHom => "ch",
            A => "A",
            A1 => "A'",
            A2 => "A''",
            B => "B",
            B1 => "B'",
            B2 => "B''",
            RFn => "R",
            RFn1 => "R'",
            RFn2 => "R''",
            F => "f",
            F1 => "f'",
            RadS => "sqrt(r^2-c0)",
            RadT => "sqrt(m^2+l^2)",
            RadW => "sqrt(f)",
            RadU => "sqrt(r^2+l^2)",
        }
    }

    /// Atoms whose square reduces to a relation; canonical forms keep their
    /// degree at most one.
    pub fn is_constrained(self) -> bool {
        use Atom::*;
        matches!(self, SinPsi | SinTheta | SinPhi | RadS | RadT | RadW | RadU)
    }

    /// The head of a formal-function derivative chain, if this atom is part
    /// of one.
    pub fn chain_head(self) -> Option<Atom> {
        use Atom::*;
        match self {
            A | A1 | A2 => Some(A),
            B | B1 | B2 => Some(B),
            RFn | RFn1 | RFn2 => Some(RFn),
            F | F1 => Some(F),
            _ => None,
        }
    }

    /// The (ordered) derivative chain headed by this atom.
    pub fn chain(self) -> Option<&'static [Atom]> {
        use Atom::*;
        match self {
            A => Some(&[A, A1, A2]),
            B => Some(&[B, B1, B2]),
            RFn => Some(&[RFn, RFn1, RFn2]),
            F => Some(&[F, F1]),
            _ => None,
        }
    }

    /// Next derivative in a chain; an error once the chain is exhausted.
    pub fn chain_next(self) -> Result<Option<Atom>> {
        use Atom::*;
        match self {
            A => Ok(Some(A1)),
            A1 => Ok(Some(A2)),
            B => Ok(Some(B1)),
            B1 => Ok(Some(B2)),
            RFn => Ok(Some(RFn1)),
            RFn1 => Ok(Some(RFn2)),
            F => Ok(Some(F1)),
            A2 | B2 | RFn2 => Err(Error::DerivativeCap(
                "third derivative of a formal function".into(),
            )),
            F1 => Err(Error::DerivativeCap("second derivative of f".into())),
            _ => Ok(None),
        }
    }
}

/// Look up an atom by its surface name, as used by the parser.
pub fn atom_by_name(name: &str) -> Option<Atom> {
    use Atom::*;
    Some(match name {
        "r" => R,
        "r'" | "rp" => RPrime,
        "m" => M,
        "l" => L,
        "c0" => C0,
        "c1" => C1,
        "R0" => RZero,
        "ch" => CHom,
        "A" => A,
        "A'" => A1,
        "A''" => A2,
        "B" => B,
        "B'" => B1,
        "B''" => B2,
        "R" => RFn,
        "R'" => RFn1,
        "R''" => RFn2,
        "f" => F,
        "f'" => F1,
        _ => return None,
    })
}
