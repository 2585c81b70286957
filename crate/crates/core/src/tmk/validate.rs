use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::domain::{operator_schema, ActionKind, SchemaLiteral};
use crate::vocabulary::Vocabulary;

use super::{Condition, TmkModel, TmkNotation};

/// Structural defect that makes a model inconsistent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OperatorCount { goals: usize, mechanisms: usize },
    DanglingMechanism { goal: String, mechanism: String },
    AmbiguousMechanism { goal: String, mechanism: String },
    UnhousedPredicate { name: String },
    Arity { owner: String, condition: String, expected: usize, found: usize },
    ParameterScope { owner: String, parameter: String },
    MechanismType { mechanism: String, kind: String },
    DuplicateKnowledge { name: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OperatorCount { goals, mechanisms } => {
                write!(f, "expected 4 goals and 4 mechanisms, found {goals} and {mechanisms}")
            }
            Violation::DanglingMechanism { goal, mechanism } => {
                write!(f, "goal {goal} links to missing mechanism {mechanism}")
            }
            Violation::AmbiguousMechanism { goal, mechanism } => {
                write!(f, "goal {goal} links to mechanism {mechanism}, which is defined more than once")
            }
            Violation::UnhousedPredicate { name } => {
                write!(f, "predicate {name} is not defined in Knowledge")
            }
            Violation::Arity { owner, condition, expected, found } => {
                write!(f, "{owner}: {condition} takes {expected} arguments, found {found}")
            }
            Violation::ParameterScope { owner, parameter } => {
                write!(f, "{owner}: parameter {parameter} is not an input parameter")
            }
            Violation::MechanismType { mechanism, kind } => {
                write!(f, "mechanism {mechanism} has type {kind}, expected operation")
            }
            Violation::DuplicateKnowledge { name } => {
                write!(f, "Knowledge defines {name} more than once")
            }
        }
    }
}

/// Non-fatal observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lint {
    GivenDiffersFromRequires { goal: String },
    MakesDiffersFromProvides { goal: String },
    UnusedKnowledge { name: String },
    /// The condition was written as informal prose and is
    /// emitted in canonical form.
    InformalProse { mechanism: String, condition: String },
}

impl fmt::Display for Lint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lint::GivenDiffersFromRequires { goal } => {
                write!(f, "goal {goal}: given differs from its mechanism's requires")
            }
            Lint::MakesDiffersFromProvides { goal } => {
                write!(f, "goal {goal}: makes differs from its mechanism's provides")
            }
            Lint::UnusedKnowledge { name } => {
                write!(f, "Knowledge entry {name} is not referenced")
            }
            Lint::InformalProse { mechanism, condition } => write!(
                f,
                "mechanism {mechanism}: {condition} is written as informal prose"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub lints: Vec<Lint>,
}

impl ValidationReport {
    /// No violations. Lints do not count.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn as_set(conds: &[Condition]) -> BTreeSet<&Condition> {
    conds.iter().collect()
}

fn check_conditions(
    report: &mut ValidationReport,
    notation: &TmkNotation,
    knowledge_names: &BTreeSet<&str>,
    owner: &str,
    params: &[String],
    conds: &[Condition],
    unhoused: &mut BTreeSet<String>,
) {
    for cond in conds {
        let expected = cond.predicate.arity();
        if cond.args.len() != expected {
            report.violations.push(Violation::Arity {
                owner: owner.to_string(),
                condition: notation.render(cond),
                expected,
                found: cond.args.len(),
            });
        }
        for arg in &cond.args {
            if !params.contains(arg) && !knowledge_names.contains(arg.as_str()) {
                report.violations.push(Violation::ParameterScope {
                    owner: owner.to_string(),
                    parameter: arg.clone(),
                });
            }
        }
        let name = notation.name(cond.predicate);
        if !knowledge_names.contains(name) {
            unhoused.insert(name.to_string());
        }
        if let Some(constant) = &notation.on_table_constant {
            if cond.predicate == crate::domain::Predicate::OnTable
                && !knowledge_names.contains(constant.as_str())
            {
                unhoused.insert(constant.clone());
            }
        }
    }
}

/// Lists structural violations and lints. A clean report has no violations.
pub fn validate_tmk(model: &TmkModel) -> ValidationReport {
    let mut report = ValidationReport::default();
    let notation = &model.notation;

    if model.goals.len() != 4 || model.mechanisms.len() != 4 {
        report.violations.push(Violation::OperatorCount {
            goals: model.goals.len(),
            mechanisms: model.mechanisms.len(),
        });
    }

    let mut knowledge_names = BTreeSet::new();
    for name in model.knowledge.names() {
        if !knowledge_names.insert(name) {
            report.violations.push(Violation::DuplicateKnowledge { name: name.into() });
        }
    }

    let mut unhoused = BTreeSet::new();
    for goal in &model.goals {
        let owner = format!("goal {}", goal.name);
        for conds in [&goal.given, &goal.makes] {
            check_conditions(
                &mut report,
                notation,
                &knowledge_names,
                &owner,
                &goal.input_parameters,
                conds,
                &mut unhoused,
            );
        }
        let linked: Vec<_> = model
            .mechanisms
            .iter()
            .filter(|m| m.name == goal.mechanism)
            .collect();
        match linked.as_slice() {
            [] => report.violations.push(Violation::DanglingMechanism {
                goal: goal.name.clone(),
                mechanism: goal.mechanism.clone(),
            }),
            [mechanism] => {
                if as_set(&goal.given) != as_set(&mechanism.requires) {
                    report.lints.push(Lint::GivenDiffersFromRequires {
                        goal: goal.name.clone(),
                    });
                }
                if as_set(&goal.makes) != as_set(&mechanism.provides) {
                    report.lints.push(Lint::MakesDiffersFromProvides {
                        goal: goal.name.clone(),
                    });
                }
            }
            _ => report.violations.push(Violation::AmbiguousMechanism {
                goal: goal.name.clone(),
                mechanism: goal.mechanism.clone(),
            }),
        }
    }
    for mechanism in &model.mechanisms {
        let owner = format!("mechanism {}", mechanism.name);
        if mechanism.kind != "operation" {
            report.violations.push(Violation::MechanismType {
                mechanism: mechanism.name.clone(),
                kind: mechanism.kind.clone(),
            });
        }
        for conds in [&mechanism.requires, &mechanism.provides] {
            check_conditions(
                &mut report,
                notation,
                &knowledge_names,
                &owner,
                &mechanism.input_parameters,
                conds,
                &mut unhoused,
            );
        }
        for text in &mechanism.prose {
            let parsed = notation.parse(text, &mechanism.input_parameters);
            report.lints.push(Lint::InformalProse {
                mechanism: mechanism.name.clone(),
                condition: parsed.map_or_else(|| text.clone(), |c| notation.render(&c)),
            });
        }
    }
    report.violations.extend(
        unhoused
            .into_iter()
            .map(|name| Violation::UnhousedPredicate { name }),
    );

    for entry in model.knowledge.concepts.iter().chain(&model.knowledge.relations) {
        if !is_referenced(model, &entry.name) {
            report.lints.push(Lint::UnusedKnowledge {
                name: entry.name.clone(),
            });
        }
    }
    report
}

fn is_referenced(model: &TmkModel, name: &str) -> bool {
    let needle = name.to_lowercase();
    let n = &model.notation;
    let mut texts: Vec<String> = Vec::new();
    for g in &model.goals {
        texts.extend([g.name.clone(), g.description.clone(), g.mechanism.clone()]);
        texts.extend(g.input_parameters.iter().chain(&g.output_parameters).cloned());
        texts.extend(g.given.iter().chain(&g.makes).map(|c| n.render(c)));
    }
    for m in &model.mechanisms {
        texts.extend([m.name.clone(), m.description.clone(), m.process.clone()]);
        texts.extend(m.input_parameters.iter().chain(&m.output_parameters).cloned());
        texts.extend(m.requires.iter().chain(&m.provides).map(|c| n.render(c)));
    }
    for e in model.knowledge.concepts.iter().chain(&model.knowledge.relations) {
        if e.name != name {
            texts.push(e.description.clone());
        }
    }
    texts.iter().any(|t| t.to_lowercase().contains(&needle))
}

/// Which operator a goal encodes, from its name and the vocabulary's
/// action names (`PickUpBlock` -> pick up, `AttackObject` -> Attack).
fn operator_for(goal_name: &str, vocab: &Vocabulary) -> Option<ActionKind> {
    let squash = |s: &str| {
        s.chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect::<String>()
    };
    let goal = squash(goal_name);
    ActionKind::ALL
        .into_iter()
        .filter(|k| goal.starts_with(&squash(vocab.action_name(*k))))
        .max_by_key(|k| vocab.action_name(*k).len())
}

fn instantiate(lits: &[SchemaLiteral], params: &[String], positive: bool) -> BTreeSet<Condition> {
    lits.iter()
        .map(|l| Condition {
            predicate: l.predicate,
            args: l.params.iter().map(|i| params[*i].clone()).collect(),
            positive,
        })
        .collect()
}

/// Every way `model` disagrees with the STRIPS operators under `vocab`.
///
/// For each operator, `given` and `requires` must equal the preconditions;
/// `makes` and `provides` must contain every add effect and nothing that
/// is not an effect (delete effects appear negated and may be partial).
pub fn semantics_mismatches(model: &TmkModel, vocab: &Vocabulary) -> Vec<String> {
    let mut out = Vec::new();
    if model.notation != TmkNotation::for_vocabulary(vocab) {
        out.push(format!(
            "predicate notation does not match the {} vocabulary",
            vocab.variant
        ));
    }
    let mut covered: BTreeMap<ActionKind, String> = BTreeMap::new();
    for goal in &model.goals {
        let Some(kind) = operator_for(&goal.name, vocab) else {
            out.push(format!("goal {} names no {} action", goal.name, vocab.variant));
            continue;
        };
        if let Some(prev) = covered.insert(kind, goal.name.clone()) {
            out.push(format!("goals {prev} and {} both encode {kind:?}", goal.name));
        }
        if goal.input_parameters.len() < kind.arity() {
            out.push(format!("goal {} has too few parameters", goal.name));
            continue;
        }
        let schema = operator_schema(kind);
        let pre = instantiate(&schema.pre, &goal.input_parameters, true);
        let add = instantiate(&schema.add, &goal.input_parameters, true);
        let del = instantiate(&schema.del, &goal.input_parameters, false);
        let effects: BTreeSet<&Condition> = add.iter().chain(&del).collect();
        let check_effects = |label: &str, conds: &[Condition], out: &mut Vec<String>| {
            let set: BTreeSet<&Condition> = conds.iter().collect();
            for missing in add.iter().filter(|c| !set.contains(c)) {
                out.push(format!("{label} lacks add effect {missing}"));
            }
            for extra in set.iter().filter(|c| !effects.contains(*c)) {
                out.push(format!("{label} states non-effect {extra}"));
            }
        };
        if as_set(&goal.given) != pre.iter().collect() {
            out.push(format!("goal {}: given differs from preconditions", goal.name));
        }
        check_effects(&format!("goal {} makes", goal.name), &goal.makes, &mut out);
        if let Some(mechanism) = model.mechanism(&goal.mechanism) {
            let params = &mechanism.input_parameters;
            if params.len() < kind.arity() {
                out.push(format!("mechanism {} has too few parameters", mechanism.name));
                continue;
            }
            let pre = instantiate(&schema.pre, params, true);
            if as_set(&mechanism.requires) != pre.iter().collect() {
                out.push(format!(
                    "mechanism {}: requires differs from preconditions",
                    mechanism.name
                ));
            }
            let add_m = instantiate(&schema.add, params, true);
            let del_m = instantiate(&schema.del, params, false);
            let set: BTreeSet<&Condition> = mechanism.provides.iter().collect();
            for missing in add_m.iter().filter(|c| !set.contains(c)) {
                out.push(format!("mechanism {} provides lacks add effect {missing}", mechanism.name));
            }
            for extra in set.iter().filter(|c| !add_m.contains(c) && !del_m.contains(c)) {
                out.push(format!("mechanism {} provides non-effect {extra}", mechanism.name));
            }
        } else {
            out.push(format!("goal {} has no mechanism", goal.name));
        }
    }
    for kind in ActionKind::ALL {
        if !covered.contains_key(&kind) {
            out.push(format!("no goal encodes {kind:?}"));
        }
    }
    out
}

/// True iff the model is faithful to the executable operators.
pub fn semantics_check(model: &TmkModel, vocab: &Vocabulary) -> bool {
    semantics_mismatches(model, vocab).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Predicate;
    use crate::tmk::{generate_tmk, parse_tmk, verbatim};
    use crate::vocabulary::Variant;

    fn classic() -> (TmkModel, Vocabulary) {
        let vocab = Vocabulary::builtin(Variant::Classic);
        (generate_tmk(&vocab), vocab)
    }

    #[test]
    fn generated_models_are_clean_and_faithful() {
        for variant in Variant::ALL {
            let vocab = Vocabulary::builtin(variant);
            let model = generate_tmk(&vocab);
            let report = validate_tmk(&model);
            assert!(report.is_clean(), "{variant}: {:?}", report.violations);
            assert_eq!(semantics_mismatches(&model, &vocab), Vec::<String>::new());
        }
    }

    #[test]
    fn given_and_requires_coincide_in_generated_models() {
        for variant in Variant::ALL {
            let report = validate_tmk(&generate_tmk(&Vocabulary::builtin(variant)));
            assert!(!report
                .lints
                .iter()
                .any(|l| matches!(l, Lint::GivenDiffersFromRequires { .. })));
        }
    }

    #[test]
    fn random_extra_concepts_are_flagged_unused() {
        let report = validate_tmk(&generate_tmk(&Vocabulary::builtin(Variant::Random)));
        let unused: Vec<_> = report
            .lints
            .iter()
            .filter_map(|l| match l {
                Lint::UnusedKnowledge { name } => Some(name.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(unused, ["isWellFormed", "matches"]);
    }

    #[test]
    fn classic_informal_provides_are_linted() {
        let model = parse_tmk(
            verbatim::for_variant(Variant::Classic),
            &TmkNotation::for_variant(Variant::Classic),
        )
        .unwrap();
        let report = validate_tmk(&model);
        assert!(report.lints.contains(&Lint::InformalProse {
            mechanism: "PickUpBlockMechanism".into(),
            condition: "NOT HandIsEmpty()".into(),
        }));
        let generated = validate_tmk(&classic().0);
        assert!(!generated
            .lints
            .iter()
            .any(|l| matches!(l, Lint::InformalProse { .. })));
    }

    #[test]
    fn dangling_mechanism_is_one_violation() {
        let (mut model, _) = classic();
        model.goals[0].mechanism = "NoSuchMechanism".into();
        let report = validate_tmk(&model);
        assert_eq!(
            report.violations,
            vec![Violation::DanglingMechanism {
                goal: "PickUpBlock".into(),
                mechanism: "NoSuchMechanism".into(),
            }]
        );
    }

    #[test]
    fn removing_is_clear_from_knowledge_unhouses_it() {
        let (mut model, _) = classic();
        model.knowledge.concepts.retain(|c| c.name != "IsClear");
        let report = validate_tmk(&model);
        assert_eq!(
            report.violations,
            vec![Violation::UnhousedPredicate {
                name: "IsClear".into()
            }]
        );
    }

    #[test]
    fn arity_and_scope_errors_are_reported() {
        let (mut model, _) = classic();
        model.goals[1].given.push(Condition::pos(Predicate::On, &["block"]));
        model.goals[1].makes.push(Condition::pos(Predicate::Clear, &["elsewhere"]));
        let report = validate_tmk(&model);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Arity { expected: 2, found: 1, .. })));
        assert!(report.violations.contains(&Violation::ParameterScope {
            owner: "goal PutDownBlock".into(),
            parameter: "elsewhere".into(),
        }));
    }

    #[test]
    fn deleted_precondition_fails_semantics() {
        let (mut model, vocab) = classic();
        let stack = model.goal_mut("StackBlock").unwrap();
        stack
            .given
            .retain(|c| *c != Condition::pos(Predicate::Clear, &["blockTarget"]));
        assert!(!semantics_check(&model, &vocab));
    }

    #[test]
    fn wrong_effect_fails_semantics() {
        let (mut model, vocab) = classic();
        model.goals[0].makes.push(Condition::pos(Predicate::Clear, &["block"]));
        assert!(!semantics_check(&model, &vocab));
        let (mut model, vocab) = classic();
        model.goals[2].makes.retain(|c| c.predicate != Predicate::On);
        assert!(!semantics_check(&model, &vocab));
    }

    #[test]
    fn model_checked_against_the_wrong_vocabulary_fails() {
        let model = generate_tmk(&Vocabulary::builtin(Variant::Mystery));
        assert!(!semantics_check(&model, &Vocabulary::builtin(Variant::Random)));
    }

    #[test]
    fn goal_names_resolve_to_operators() {
        let classic = Vocabulary::builtin(Variant::Classic);
        assert_eq!(operator_for("UnstackBlock", &classic), Some(ActionKind::Unstack));
        assert_eq!(operator_for("StackBlock", &classic), Some(ActionKind::Stack));
        assert_eq!(operator_for("PickUpBlock", &classic), Some(ActionKind::PickUp));
        let random = Vocabulary::builtin(Variant::Random);
        assert_eq!(operator_for("xptxjrdkbi3pqsqr", &random), Some(ActionKind::Unstack));
    }
}
