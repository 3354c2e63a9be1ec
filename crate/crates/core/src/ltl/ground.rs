use std::fmt;

use super::{collect_vars, LtlFormula, VarRef};
use crate::knowledge::{augment_dictionary, Category, DataDictionaryEntry};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroundingViolation {
    /// The variable does not name a dictionary entry.
    UnknownVariable(VarRef),
    /// A primed reference to an input port; inputs are never written by the IP.
    PrimedInput(String),
}

impl fmt::Display for GroundingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundingViolation::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            GroundingViolation::PrimedInput(n) => write!(f, "primed input port `{n}'`"),
        }
    }
}

/// Checks every variable of `f` against the dictionary (with the implicit
/// `__ret` entry added when no return value is declared).
pub fn ground_check(f: &LtlFormula, dict: &[DataDictionaryEntry]) -> Vec<GroundingViolation> {
    let dict = augment_dictionary(dict, "");
    let mut out = Vec::new();
    for v in collect_vars(f) {
        match dict.iter().find(|e| e.name == v.name) {
            None => out.push(GroundingViolation::UnknownVariable(v)),
            Some(e) if v.primed && e.category == Category::InputPort => {
                out.push(GroundingViolation::PrimedInput(v.name.clone()))
            }
            Some(_) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::ValueType;
    use crate::ltl::parse_ltl;

    fn dict() -> Vec<DataDictionaryEntry> {
        let e = |n: &str, c| DataDictionaryEntry {
            name: n.into(),
            value_type: ValueType::Int32,
            category: c,
            explanation: "x".into(),
        };
        vec![
            e("rdLen", Category::InputPort),
            e("cntLenRd", Category::OutputPort),
            e("totalLenRd", Category::OutputPort),
        ]
    }

    #[test]
    fn flags_unknown_names() {
        let f = parse_ltl(
            "G(reLen != 19 -> F(cntLenRd' = cntLenRd + 1 && totalLenRd' = totalLenRd + 1 && reVal = FALSE))",
        )
        .unwrap();
        assert_eq!(
            ground_check(&f, &dict()),
            vec![
                GroundingViolation::UnknownVariable(VarRef::new("reLen")),
                GroundingViolation::UnknownVariable(VarRef::new("reVal")),
            ]
        );
    }

    #[test]
    fn known_names_and_ret_pass() {
        assert!(ground_check(&parse_ltl("G(rdLen > 0)").unwrap(), &dict()).is_empty());
        assert!(ground_check(&parse_ltl("G(__ret' = TRUE)").unwrap(), &dict()).is_empty());
    }

    #[test]
    fn primed_input_is_a_violation() {
        assert_eq!(
            ground_check(&parse_ltl("G(rdLen' = 0)").unwrap(), &dict()),
            vec![GroundingViolation::PrimedInput("rdLen".into())]
        );
    }
}
