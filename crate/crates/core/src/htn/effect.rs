//! Planner-time belief changes applied by primitive tasks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beliefs::{BeliefSet, BeliefValue};
use crate::registry::EffectTable;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    /// Replace, creating the belief if needed.
    Rep,
    And,
    Or,
    Not,
    /// A function registered in the [`EffectTable`] under this name.
    Custom(String),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EffectError {
    #[error("belief {0:?} is absent")]
    Absent(String),
    #[error("effect on {0:?} needs a value")]
    MissingValue(String),
    #[error("{op:?} on {key:?}: cannot combine {lhs} with {rhs}")]
    Type {
        key: String,
        op: EffectOp,
        lhs: &'static str,
        rhs: &'static str,
    },
    #[error("division by zero on {0:?}")]
    DivisionByZero(String),
    #[error("arithmetic overflow on {0:?}")]
    Overflow(String),
    #[error("non-finite result on {0:?}")]
    NonFinite(String),
    #[error("no custom effect registered as {0:?}")]
    UnknownCustom(String),
    #[error("custom effect {name:?} failed: {reason}")]
    Custom { name: String, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub belief: String,
    pub op: EffectOp,
    pub value: Option<BeliefValue>,
}

impl Effect {
    pub fn new(belief: impl Into<String>, op: EffectOp, value: impl Into<BeliefValue>) -> Self {
        Effect {
            belief: belief.into(),
            op,
            value: Some(value.into()),
        }
    }

    pub fn not(belief: impl Into<String>) -> Self {
        Effect {
            belief: belief.into(),
            op: EffectOp::Not,
            value: None,
        }
    }

    pub fn custom(belief: impl Into<String>, name: impl Into<String>) -> Self {
        Effect {
            belief: belief.into(),
            op: EffectOp::Custom(name.into()),
            value: None,
        }
    }

    /// Applies the effect in place. On error `beliefs` is left untouched.
    pub fn apply(&self, beliefs: &mut BeliefSet, table: &EffectTable) -> Result<(), EffectError> {
        let key = &self.belief;
        match &self.op {
            EffectOp::Custom(name) => {
                let f = table
                    .get(name)
                    .ok_or_else(|| EffectError::UnknownCustom(name.clone()))?;
                let mut scratch = beliefs.clone();
                f(&mut scratch, self.value.as_ref()).map_err(|reason| EffectError::Custom {
                    name: name.clone(),
                    reason,
                })?;
                *beliefs = scratch;
                Ok(())
            }
            EffectOp::Rep => {
                let v = self.operand()?;
                beliefs.set(key.clone(), v.clone());
                Ok(())
            }
            EffectOp::Not => {
                let cur = beliefs
                    .get(key)
                    .ok_or_else(|| EffectError::Absent(key.clone()))?;
                let b = cur.as_bool().ok_or_else(|| self.type_err(cur, cur))?;
                beliefs.set(key.clone(), !b);
                Ok(())
            }
            op => {
                let rhs = self.operand()?;
                let lhs = beliefs
                    .get(key)
                    .ok_or_else(|| EffectError::Absent(key.clone()))?;
                let out = match op {
                    EffectOp::And | EffectOp::Or => {
                        let (Some(a), Some(b)) = (lhs.as_bool(), rhs.as_bool()) else {
                            return Err(self.type_err(lhs, rhs));
                        };
                        BeliefValue::Bool(if *op == EffectOp::And { a && b } else { a || b })
                    }
                    _ => self.arith(lhs, rhs)?,
                };
                beliefs.set(key.clone(), out);
                Ok(())
            }
        }
    }

    fn operand(&self) -> Result<&BeliefValue, EffectError> {
        self.value
            .as_ref()
            .ok_or_else(|| EffectError::MissingValue(self.belief.clone()))
    }

    fn type_err(&self, lhs: &BeliefValue, rhs: &BeliefValue) -> EffectError {
        EffectError::Type {
            key: self.belief.clone(),
            op: self.op.clone(),
            lhs: lhs.type_name(),
            rhs: rhs.type_name(),
        }
    }

    fn arith(&self, lhs: &BeliefValue, rhs: &BeliefValue) -> Result<BeliefValue, EffectError> {
        let key = || self.belief.clone();
        if let (BeliefValue::Int(a), BeliefValue::Int(b)) = (lhs, rhs) {
            let (a, b) = (*a, *b);
            let int = match self.op {
                EffectOp::Add => Some(a.checked_add(b)),
                EffectOp::Sub => Some(a.checked_sub(b)),
                EffectOp::Mul => Some(a.checked_mul(b)),
                EffectOp::Mod => {
                    if b == 0 {
                        return Err(EffectError::DivisionByZero(key()));
                    }
                    // Result takes the sign of the divisor.
                    Some(a.checked_rem(b).map(|r| if r != 0 && (r < 0) != (b < 0) { r + b } else { r }))
                }
                EffectOp::Pow if b >= 0 => Some(u32::try_from(b).ok().and_then(|e| a.checked_pow(e))),
                _ => None,
            };
            if let Some(res) = int {
                return res.map(BeliefValue::Int).ok_or_else(|| EffectError::Overflow(key()));
            }
        }
        let (Some(a), Some(b)) = (lhs.as_f64(), rhs.as_f64()) else {
            return Err(self.type_err(lhs, rhs));
        };
        let r = match self.op {
            EffectOp::Add => a + b,
            EffectOp::Sub => a - b,
            EffectOp::Mul => a * b,
            EffectOp::Div => {
                if b == 0.0 {
                    return Err(EffectError::DivisionByZero(key()));
                }
                a / b
            }
            EffectOp::Mod => {
                if b == 0.0 {
                    return Err(EffectError::DivisionByZero(key()));
                }
                let r = a % b;
                if r != 0.0 && (r < 0.0) != (b < 0.0) {
                    r + b
                } else {
                    r
                }
            }
            EffectOp::Pow => a.powf(b),
            _ => unreachable!("non-arithmetic op routed to arith"),
        };
        if !r.is_finite() {
            return Err(EffectError::NonFinite(key()));
        }
        Ok(BeliefValue::Real(r))
    }
}

/// Applies `effects` in order; stops at the first failure.
pub fn apply_all<'a>(
    effects: impl IntoIterator<Item = &'a Effect>,
    beliefs: &mut BeliefSet,
    table: &EffectTable,
) -> Result<(), EffectError> {
    effects.into_iter().try_for_each(|e| e.apply(beliefs, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(e: Effect, b: BeliefSet) -> Result<BeliefSet, EffectError> {
        let mut b = b;
        e.apply(&mut b, &EffectTable::default())?;
        Ok(b)
    }

    #[test]
    fn add_two() {
        let b = apply(Effect::new("counter", EffectOp::Add, 2), BeliefSet::new().with("counter", 3)).unwrap();
        assert_eq!(b.get("counter"), Some(&BeliefValue::Int(5)));
    }

    #[test]
    fn not_flag() {
        let b = apply(Effect::not("flag"), BeliefSet::new().with("flag", true)).unwrap();
        assert_eq!(b.get_bool("flag"), Some(false));
    }

    #[test]
    fn rep_creates_absent_key() {
        let b = apply(Effect::new("x", EffectOp::Rep, 7), BeliefSet::new()).unwrap();
        assert_eq!(b.get_i64("x"), Some(7));
    }

    #[test]
    fn arithmetic_on_absent_key_fails() {
        for op in [EffectOp::Add, EffectOp::Sub, EffectOp::Mul, EffectOp::Div, EffectOp::Mod, EffectOp::Pow] {
            assert_eq!(
                apply(Effect::new("x", op, 1), BeliefSet::new()),
                Err(EffectError::Absent("x".into()))
            );
        }
    }

    #[test]
    fn division_by_zero() {
        let b = BeliefSet::new().with("x", 4);
        assert!(matches!(
            apply(Effect::new("x", EffectOp::Div, 0), b.clone()),
            Err(EffectError::DivisionByZero(_))
        ));
        assert!(matches!(
            apply(Effect::new("x", EffectOp::Mod, 0.0), b),
            Err(EffectError::DivisionByZero(_))
        ));
    }

    #[test]
    fn div_is_real_and_mod_follows_divisor_sign() {
        let b = apply(Effect::new("x", EffectOp::Div, 2), BeliefSet::new().with("x", 5)).unwrap();
        assert_eq!(b.get("x"), Some(&BeliefValue::Real(2.5)));
        let b = apply(Effect::new("x", EffectOp::Mod, 3), BeliefSet::new().with("x", -7)).unwrap();
        assert_eq!(b.get("x"), Some(&BeliefValue::Int(2)));
        let b = apply(Effect::new("x", EffectOp::Mod, -3), BeliefSet::new().with("x", 7)).unwrap();
        assert_eq!(b.get("x"), Some(&BeliefValue::Int(-2)));
    }

    #[test]
    fn pow_and_mixed_types() {
        let b = apply(Effect::new("x", EffectOp::Pow, 3), BeliefSet::new().with("x", 2)).unwrap();
        assert_eq!(b.get("x"), Some(&BeliefValue::Int(8)));
        let b = apply(Effect::new("x", EffectOp::Pow, -1), BeliefSet::new().with("x", 2)).unwrap();
        assert_eq!(b.get("x"), Some(&BeliefValue::Real(0.5)));
        let b = apply(Effect::new("x", EffectOp::Mul, 0.5), BeliefSet::new().with("x", 3)).unwrap();
        assert_eq!(b.get("x"), Some(&BeliefValue::Real(1.5)));
    }

    #[test]
    fn type_mismatch_leaves_beliefs() {
        let start = BeliefSet::new().with("x", "text").with("f", 1);
        assert!(matches!(
            apply(Effect::new("x", EffectOp::Add, 1), start.clone()),
            Err(EffectError::Type { .. })
        ));
        assert!(matches!(
            apply(Effect::new("f", EffectOp::And, true), start.clone()),
            Err(EffectError::Type { .. })
        ));
        assert!(matches!(apply(Effect::not("f"), start), Err(EffectError::Type { .. })));
    }

    #[test]
    fn boolean_ops() {
        let b = BeliefSet::new().with("f", true);
        let r = apply(Effect::new("f", EffectOp::And, false), b.clone()).unwrap();
        assert_eq!(r.get_bool("f"), Some(false));
        let r = apply(Effect::new("f", EffectOp::Or, false), b).unwrap();
        assert_eq!(r.get_bool("f"), Some(true));
    }

    #[test]
    fn overflow_is_an_error() {
        let b = BeliefSet::new().with("x", i64::MAX);
        assert!(matches!(
            apply(Effect::new("x", EffectOp::Add, 1), b),
            Err(EffectError::Overflow(_))
        ));
    }

    #[test]
    fn custom_effect_sees_whole_belief_set() {
        let mut t = EffectTable::default();
        t.register("t.swap", |b, _| {
            let x = b.get("x").cloned().ok_or("no x")?;
            let y = b.get("y").cloned().ok_or("no y")?;
            b.set("x", y);
            b.set("y", x);
            Ok(())
        });
        let mut b = BeliefSet::new().with("x", 1).with("y", 2);
        Effect::custom("x", "t.swap").apply(&mut b, &t).unwrap();
        assert_eq!((b.get_i64("x"), b.get_i64("y")), (Some(2), Some(1)));

        let mut partial = BeliefSet::new().with("x", 1);
        let before = partial.clone();
        assert!(Effect::custom("x", "t.swap").apply(&mut partial, &t).is_err());
        assert_eq!(partial, before);
        assert!(matches!(
            Effect::custom("x", "t.none").apply(&mut partial, &t),
            Err(EffectError::UnknownCustom(_))
        ));
    }

    proptest! {
        #[test]
        fn int_add_sub_roundtrip(x in -1_000_000i64..1_000_000, d in -1000i64..1000) {
            let b = BeliefSet::new().with("x", x);
            let b = apply(Effect::new("x", EffectOp::Add, d), b).unwrap();
            let b = apply(Effect::new("x", EffectOp::Sub, d), b).unwrap();
            prop_assert_eq!(b.get("x"), Some(&BeliefValue::Int(x)));
        }

        #[test]
        fn int_mod_is_in_divisor_range(x in any::<i32>(), m in 1i64..50) {
            let b = apply(Effect::new("x", EffectOp::Mod, m), BeliefSet::new().with("x", x as i64)).unwrap();
            let r = b.get_i64("x").unwrap();
            prop_assert!((0..m).contains(&r));
            prop_assert_eq!((x as i64 - r).rem_euclid(m), 0);
        }
    }
}
