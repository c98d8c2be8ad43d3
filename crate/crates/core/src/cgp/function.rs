use std::fmt;

use serde::{Deserialize, Serialize};

/// Denominators smaller than this in magnitude make division return the
/// numerator unchanged.
pub const DIV_EPSILON: f64 = 1e-9;

/// Node functions. All have arity two. The discriminant is the gene value
/// stored in a genotype.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Function {
    Add,
    Sub,
    Mul,
    DivProtected,
}

impl Function {
    pub const ALL: [Function; 4] = [
        Function::Add,
        Function::Sub,
        Function::Mul,
        Function::DivProtected,
    ];

    pub const ARITY: usize = 2;

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Function> {
        Self::ALL.get(id).copied()
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Function::Add => a + b,
            Function::Sub => a - b,
            Function::Mul => a * b,
            Function::DivProtected => {
                if b.abs() < DIV_EPSILON {
                    a
                } else {
                    a / b
                }
            }
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Function::Add => "+",
            Function::Sub => "-",
            Function::Mul => "*",
            Function::DivProtected => "/",
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
