use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::{Verdict, CMP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TNormKind {
    Product,
    Minimum,
    Lukasiewicz,
    Hamacher,
    Custom,
}

type BinOp = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A continuous t-norm on [0, 1].
#[derive(Clone)]
pub struct TNorm {
    kind: TNormKind,
    positive: bool,
    custom: Option<BinOp>,
}

impl fmt::Debug for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TNorm")
            .field("kind", &self.kind)
            .field("positive", &self.positive)
            .finish()
    }
}

impl TNorm {
    pub fn product() -> Self {
        Self::builtin(TNormKind::Product, true)
    }
    pub fn minimum() -> Self {
        Self::builtin(TNormKind::Minimum, true)
    }
    pub fn lukasiewicz() -> Self {
        Self::builtin(TNormKind::Lukasiewicz, false)
    }
    pub fn hamacher() -> Self {
        Self::builtin(TNormKind::Hamacher, true)
    }

    fn builtin(kind: TNormKind, positive: bool) -> Self {
        TNorm {
            kind,
            positive,
            custom: None,
        }
    }

    /// A user operation; `positive` is the declared positivity flag.
    pub fn custom(op: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, positive: bool) -> Self {
        TNorm {
            kind: TNormKind::Custom,
            positive,
            custom: Some(Arc::new(op)),
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "product" => Ok(Self::product()),
            "minimum" | "min" => Ok(Self::minimum()),
            "lukasiewicz" => Ok(Self::lukasiewicz()),
            "hamacher" => Ok(Self::hamacher()),
            _ => Err(Error::UnknownId {
                kind: "t-norm",
                id: id.to_string(),
            }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            TNormKind::Product => "product",
            TNormKind::Minimum => "minimum",
            TNormKind::Lukasiewicz => "lukasiewicz",
            TNormKind::Hamacher => "hamacher",
            TNormKind::Custom => "custom",
        }
    }

    pub fn kind(&self) -> TNormKind {
        self.kind
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// `a * b` with domain checking.
    pub fn apply(&self, a: f64, b: f64) -> Result<f64> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        Ok(self.eval(a, b))
    }

    /// `a * b` without domain checking, for inputs already known to lie in [0, 1].
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            TNormKind::Product => a * b,
            TNormKind::Minimum => a.min(b),
            TNormKind::Lukasiewicz => (a + b - 1.0).max(0.0),
            TNormKind::Hamacher => {
                if a == 0.0 && b == 0.0 {
                    0.0
                } else {
                    a * b / (a + b - a * b)
                }
            }
            TNormKind::Custom => (self.custom.as_ref().expect("custom t-norm"))(a, b),
        }
    }
}

/// Outcome of one sampled axiom, with the first violating inputs if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub name: String,
    pub verdict: Verdict,
    /// Inputs of the first violation.
    pub witness: Option<Vec<f64>>,
    /// Offending computed values, same order as the axiom's sides.
    pub values: Option<Vec<f64>>,
}

impl AxiomCheck {
    pub(crate) fn pass(name: &str) -> Self {
        AxiomCheck {
            name: name.into(),
            verdict: Verdict::Satisfied,
            witness: None,
            values: None,
        }
    }

    pub(crate) fn fail(name: &str, witness: Vec<f64>, values: Vec<f64>) -> Self {
        AxiomCheck {
            name: name.into(),
            verdict: Verdict::Violated,
            witness: Some(witness),
            values: Some(values),
        }
    }

    pub(crate) fn from_first(name: &str, first: Option<(Vec<f64>, Vec<f64>)>) -> Self {
        match first {
            Some((w, v)) => Self::fail(name, w, v),
            None => Self::pass(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TNormAxiomReport {
    pub tnorm: String,
    pub samples: usize,
    pub seed: u64,
    pub declared_positive: bool,
    pub identity: AxiomCheck,
    pub commutativity: AxiomCheck,
    pub monotonicity: AxiomCheck,
    pub associativity: AxiomCheck,
    pub positivity: AxiomCheck,
}

impl TNormAxiomReport {
    /// Identity, commutativity, monotonicity and associativity all hold.
    pub fn is_tnorm(&self) -> bool {
        [
            &self.identity,
            &self.commutativity,
            &self.monotonicity,
            &self.associativity,
        ]
        .iter()
        .all(|c| c.verdict.is_satisfied())
    }
}

const PROBES: [(f64, f64); 5] = [
    (0.3, 0.4),
    (0.5, 0.5),
    (0.1, 0.9),
    (0.25, 0.6),
    (1e-3, 1e-3),
];

/// Check the t-norm axioms on fixed probes followed by `samples` seeded random tuples.
pub fn tnorm_axiom_check(norm: &TNorm, samples: usize, seed: u64) -> TNormAxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<[f64; 4]> = PROBES
        .iter()
        .map(|&(a, b)| [a, b, 0.7, 0.8])
        .chain((0..samples).map(|_| rng.gen::<[f64; 4]>()))
        .collect();
    let n = |a: f64, b: f64| norm.eval(a, b);

    let identity = std::iter::once(0.5)
        .chain(tuples.iter().map(|t| t[0]))
        .find_map(|a| {
            let v = n(a, 1.0);
            ((v - a).abs() > CMP_TOL).then(|| (vec![a, 1.0], vec![v, a]))
        });
    let commutativity = tuples.iter().find_map(|&[a, b, ..]| {
        let (l, r) = (n(a, b), n(b, a));
        ((l - r).abs() > CMP_TOL).then(|| (vec![a, b], vec![l, r]))
    });
    let monotonicity = tuples.iter().find_map(|&[a, b, c, d]| {
        let (a, c) = (a.min(c), a.max(c));
        let (b, d) = (b.min(d), b.max(d));
        let (l, r) = (n(a, b), n(c, d));
        (l > r + CMP_TOL).then(|| (vec![a, b, c, d], vec![l, r]))
    });
    let associativity = tuples.iter().find_map(|&[a, b, c, _]| {
        let (l, r) = (n(n(a, b), c), n(a, n(b, c)));
        ((l - r).abs() > CMP_TOL).then(|| (vec![a, b, c], vec![l, r]))
    });
    let positivity = tuples.iter().find_map(|&[a, b, ..]| {
        let v = n(a, b);
        (a > 0.0 && b > 0.0 && v <= 0.0).then(|| (vec![a, b], vec![v]))
    });

    TNormAxiomReport {
        tnorm: norm.id().to_string(),
        samples,
        seed,
        declared_positive: norm.positive,
        identity: AxiomCheck::from_first("identity", identity),
        commutativity: AxiomCheck::from_first("commutativity", commutativity),
        monotonicity: AxiomCheck::from_first("monotonicity", monotonicity),
        associativity: AxiomCheck::from_first("associativity", associativity),
        positivity: AxiomCheck::from_first("positivity", positivity),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_examples() {
        assert_eq!(TNorm::product().apply(0.6, 0.5).unwrap(), 0.3);
        assert_eq!(TNorm::lukasiewicz().apply(0.3, 0.4).unwrap(), 0.0);
        let h = TNorm::hamacher().apply(0.5, 0.5).unwrap();
        assert!((h - 1.0 / 3.0).abs() < 1e-15);
        for norm in [
            TNorm::product(),
            TNorm::minimum(),
            TNorm::lukasiewicz(),
            TNorm::hamacher(),
        ] {
            for a in [0.0, 0.2, 0.77, 1.0] {
                assert!((norm.apply(a, 1.0).unwrap() - a).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn apply_rejects_out_of_domain() {
        assert!(matches!(
            TNorm::product().apply(1.2, 0.5),
            Err(Error::Domain { .. })
        ));
        assert!(TNorm::minimum().apply(0.5, -0.1).is_err());
    }

    #[test]
    fn builtins_pass_axioms() {
        for norm in [TNorm::product(), TNorm::minimum(), TNorm::hamacher()] {
            let rep = tnorm_axiom_check(&norm, 1000, 3);
            assert!(rep.is_tnorm(), "{}", norm.id());
            assert!(rep.positivity.verdict.is_satisfied());
        }
    }

    #[test]
    fn lukasiewicz_is_not_positive() {
        let rep = tnorm_axiom_check(&TNorm::lukasiewicz(), 1000, 3);
        assert!(rep.is_tnorm());
        assert_eq!(rep.positivity.verdict, Verdict::Violated);
        assert_eq!(rep.positivity.witness, Some(vec![0.3, 0.4]));
    }

    #[test]
    fn clipped_sum_fails_identity() {
        let norm = TNorm::custom(|a, b| (a + b).min(1.0), true);
        let rep = tnorm_axiom_check(&norm, 1000, 3);
        assert!(rep.monotonicity.verdict.is_satisfied());
        assert_eq!(rep.identity.verdict, Verdict::Violated);
        let w = rep.identity.witness.unwrap();
        assert_eq!(w[0], 0.5);
        assert_eq!(norm.eval(0.5, 1.0), 1.0);
    }

    #[test]
    fn check_is_deterministic() {
        let a = tnorm_axiom_check(&TNorm::hamacher(), 200, 11);
        let b = tnorm_axiom_check(&TNorm::hamacher(), 200, 11);
        assert_eq!(a, b);
    }
}
