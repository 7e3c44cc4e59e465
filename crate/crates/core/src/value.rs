//! Element payloads for monads and left modules.
//!
//! Every monad and module in this crate stores its elements as a `Value`
//! tagged with the arity of the free-variable set it lives over. Keeping one
//! payload type lets contexts, morphisms and checkers stay generic without a
//! type parameter threading through everything; each monad's `validate`
//! decides which shapes it accepts.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::NTerm;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// A variable of the ambient free-variable set, 1-based.
    Var(usize),
    /// The single extra point of pointed monads and modules.
    Star,
    /// A numbered constant (fixture monads).
    Const(u32),
    /// A syntax-tree element of a signature monad or module.
    Term(NTerm),
    /// A member of a tagged union module, labelled by member key.
    Tagged(String, Box<Value>),
    /// An element of a product module.
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn tagged(tag: &str, inner: Value) -> Value {
        Value::Tagged(tag.to_string(), Box::new(inner))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// Structural size; used for bounded enumeration and canonical ordering.
    pub fn size(&self) -> usize {
        match self {
            Value::Var(_) | Value::Star | Value::Const(_) => 1,
            Value::Term(t) => t.size(),
            Value::Tagged(_, inner) => inner.size(),
            Value::Pair(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Free variables that occur syntactically in the payload. Monads whose
    /// semantics differ (none do today) would override at the trait level.
    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut acc = BTreeSet::new();
        self.collect_free_vars(&mut acc);
        acc
    }

    fn collect_free_vars(&self, acc: &mut BTreeSet<usize>) {
        match self {
            Value::Var(i) => {
                acc.insert(*i);
            }
            Value::Star | Value::Const(_) => {}
            Value::Term(t) => t.free_vars(acc),
            Value::Tagged(_, inner) => inner.collect_free_vars(acc),
            Value::Pair(a, b) => {
                a.collect_free_vars(acc);
                b.collect_free_vars(acc);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(i) => write!(f, "#{i}"),
            Value::Star => write!(f, "*"),
            Value::Const(k) => write!(f, "*{k}"),
            Value::Term(t) => write!(f, "{t}"),
            // The tag is recoverable from the payload's root, so tagged
            // values print as their payload and reparse sort-directed.
            Value::Tagged(_, inner) => write!(f, "{inner}"),
            Value::Pair(a, b) => write!(f, "<{a} | {b}>"),
        }
    }
}

/// An element of R({1..arity}).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RTerm {
    pub arity: usize,
    pub value: Value,
}

impl RTerm {
    pub fn new(arity: usize, value: Value) -> RTerm {
        RTerm { arity, value }
    }

    pub fn size(&self) -> usize {
        self.value.size()
    }
}

impl fmt::Display for RTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// An element of LM({1..arity}).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LMTerm {
    pub arity: usize,
    pub value: Value,
}

impl LMTerm {
    pub fn new(arity: usize, value: Value) -> LMTerm {
        LMTerm { arity, value }
    }

    pub fn size(&self) -> usize {
        self.value.size()
    }
}

impl fmt::Display for LMTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_counts_nodes() {
        assert_eq!(Value::Var(3).size(), 1);
        assert_eq!(Value::pair(Value::Star, Value::Var(1)).size(), 3);
        assert_eq!(Value::tagged("Type", Value::Const(0)).size(), 1);
    }

    #[test]
    fn free_vars_sees_through_wrappers() {
        let v = Value::pair(Value::tagged("a", Value::Var(2)), Value::Var(5));
        assert_eq!(v.free_vars(), BTreeSet::from([2, 5]));
        assert!(Value::Star.free_vars().is_empty());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Value::Var(7).to_string(), "#7");
        assert_eq!(Value::Star.to_string(), "*");
        assert_eq!(Value::Const(2).to_string(), "*2");
        assert_eq!(
            Value::pair(Value::Star, Value::Var(1)).to_string(),
            "<* | #1>"
        );
        assert_eq!(Value::tagged("Type", Value::Star).to_string(), "*");
    }
}
