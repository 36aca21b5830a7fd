use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// Derivative of the dependent variable `u`: `i` derivatives in `x`, `j` in `t`.
/// `(0, 0)` is `u` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JetVar {
    pub i: u32,
    pub j: u32,
}

impl JetVar {
    pub const U: JetVar = JetVar { i: 0, j: 0 };

    pub const fn new(i: u32, j: u32) -> Self {
        JetVar { i, j }
    }

    pub fn order(&self) -> u32 {
        self.i + self.j
    }

    pub fn bump(&self, dir: Dir) -> JetVar {
        match dir {
            Dir::X => JetVar::new(self.i + 1, self.j),
            Dir::T => JetVar::new(self.i, self.j + 1),
        }
    }
}

// Graded by total order; within an order more x-derivatives sort first.
impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| other.i.cmp(&self.i))
    }
}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order() == 0 {
            return f.write_str("u");
        }
        f.write_str("u_")?;
        match self.i {
            0 => {}
            1 => f.write_str("x")?,
            n => write!(f, "x{n}")?,
        }
        match self.j {
            0 => {}
            1 => f.write_str("t")?,
            n => write!(f, "t{n}")?,
        }
        Ok(())
    }
}

/// Independent direction of a total derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    X,
    T,
}

/// A named constant parameter (`a`, `beta`, `c1`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A coordinate of the jet space, or a parameter.
///
/// The derived ordering is the global canonical ordering: independent
/// variables, then `u` and its derivatives graded by order, then the reduced
/// coordinates `chi`/`zeta` used for ODE reductions, then parameters sorted
/// alphabetically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    T,
    Jet(JetVar),
    /// Invariant independent variable of a reduction.
    Chi,
    /// `k`-th derivative of the reduced dependent variable with respect to `chi`.
    Zeta(u32),
    Param(Symbol),
}

impl Var {
    pub fn param(name: &str) -> Var {
        Var::Param(Symbol::new(name))
    }

    pub fn jet(i: u32, j: u32) -> Var {
        Var::Jet(JetVar::new(i, j))
    }

    pub const U: Var = Var::Jet(JetVar::U);

    pub fn is_param(&self) -> bool {
        matches!(self, Var::Param(_))
    }

    pub fn as_jet(&self) -> Option<JetVar> {
        match self {
            Var::Jet(j) => Some(*j),
            _ => None,
        }
    }

    pub fn indep(dir: Dir) -> Var {
        match dir {
            Dir::X => Var::X,
            Dir::T => Var::T,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => f.write_str("x"),
            Var::T => f.write_str("t"),
            Var::Jet(j) => j.fmt(f),
            Var::Chi => f.write_str("chi"),
            Var::Zeta(0) => f.write_str("zeta"),
            Var::Zeta(1) => f.write_str("zeta_chi"),
            Var::Zeta(k) => write!(f, "zeta_chi{k}"),
            Var::Param(s) => s.fmt(f),
        }
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_matches_canonical_sequence() {
        let seq = [
            Var::X,
            Var::T,
            Var::U,
            Var::jet(1, 0),
            Var::jet(0, 1),
            Var::jet(2, 0),
            Var::jet(1, 1),
            Var::jet(0, 2),
            Var::jet(3, 0),
            Var::Chi,
            Var::Zeta(0),
            Var::Zeta(3),
            Var::param("a"),
            Var::param("beta"),
            Var::param("c"),
        ];
        for w in seq.windows(2) {
            assert!(w[0] < w[1], "{} !< {}", w[0], w[1]);
        }
    }

    #[test]
    fn jet_names() {
        assert_eq!(Var::jet(3, 0).to_string(), "u_x3");
        assert_eq!(Var::jet(1, 1).to_string(), "u_xt");
        assert_eq!(Var::jet(2, 1).to_string(), "u_x2t");
        assert_eq!(Var::jet(0, 2).to_string(), "u_t2");
        assert_eq!(Var::Zeta(4).to_string(), "zeta_chi4");
    }
}
