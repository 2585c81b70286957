use crate::domain::Predicate::{Clear, HandEmpty, Holding, On, OnTable};
use crate::vocabulary::{Variant, Vocabulary};

use super::{Condition, KnowledgeEntry, TmkGoal, TmkKnowledge, TmkMechanism, TmkModel, TmkNotation};

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn entry(name: &str, description: &str) -> KnowledgeEntry {
    KnowledgeEntry {
        name: name.into(),
        description: description.into(),
    }
}

/// Text and conditions for one goal/mechanism pair.
struct Operator {
    goal_name: String,
    goal_description: String,
    mechanism_name: String,
    mechanism_description: String,
    params: Vec<&'static str>,
    given: Vec<Condition>,
    makes: Vec<Condition>,
    requires: Vec<Condition>,
    provides: Vec<Condition>,
    process: String,
}

impl Operator {
    fn into_pair(self) -> (TmkGoal, TmkMechanism) {
        let mut inputs = strings(&self.params);
        inputs.push("configuration".into());
        let outputs = strings(&["newConfiguration"]);
        let goal = TmkGoal {
            name: self.goal_name,
            description: self.goal_description,
            input_parameters: inputs.clone(),
            output_parameters: outputs.clone(),
            given: self.given,
            makes: self.makes,
            mechanism: self.mechanism_name.clone(),
        };
        let mechanism = TmkMechanism {
            name: self.mechanism_name,
            description: self.mechanism_description,
            input_parameters: inputs,
            output_parameters: outputs,
            kind: "operation".into(),
            requires: self.requires,
            provides: self.provides,
            process: self.process,
            prose: Vec::new(),
        };
        (goal, mechanism)
    }
}

/// Builds the TMK model for a builtin vocabulary.
///
/// Goal/mechanism names, condition sets and prose follow the reference TMK
/// documents for each variant. The Classic `makes`/`provides` sets are
/// partial effect lists there and are kept partial here.
pub fn generate_tmk(vocab: &Vocabulary) -> TmkModel {
    let notation = TmkNotation::for_vocabulary(vocab);
    let (operators, knowledge) = match vocab.variant {
        Variant::Classic => classic(),
        Variant::Mystery | Variant::Random => obfuscated(vocab),
    };
    let (goals, mechanisms) = operators.into_iter().map(Operator::into_pair).unzip();
    TmkModel {
        goals,
        mechanisms,
        knowledge,
        notation,
    }
}

fn classic() -> (Vec<Operator>, TmkKnowledge) {
    use Condition as C;
    let pick_up = Operator {
        goal_name: "PickUpBlock".into(),
        goal_description: "Pick up a block from the table.".into(),
        mechanism_name: "PickUpBlockMechanism".into(),
        mechanism_description: "Pick up {block}.".into(),
        params: vec!["block"],
        given: vec![
            C::pos(OnTable, &["block"]),
            C::pos(Clear, &["block"]),
            C::pos(HandEmpty, &[]),
        ],
        makes: vec![
            C::pos(Holding, &["block"]),
            C::neg(OnTable, &["block"]),
            C::neg(HandEmpty, &[]),
        ],
        requires: vec![
            C::pos(OnTable, &["block"]),
            C::pos(Clear, &["block"]),
            C::pos(HandEmpty, &[]),
        ],
        // "Hand not empty", "Block not on table" in the reference prose
        provides: vec![
            C::pos(Holding, &["block"]),
            C::neg(HandEmpty, &[]),
            C::neg(OnTable, &["block"]),
        ],
        process: "Remove On(block, table), add Holding(block), set hand state".into(),
    };
    let put_down = Operator {
        goal_name: "PutDownBlock".into(),
        goal_description: "Put down a held block onto the table.".into(),
        mechanism_name: "PutDownBlockMechanism".into(),
        mechanism_description: "Put down {block}.".into(),
        params: vec!["block"],
        given: vec![C::pos(Holding, &["block"])],
        makes: vec![
            C::pos(OnTable, &["block"]),
            C::pos(Clear, &["block"]),
            C::pos(HandEmpty, &[]),
        ],
        requires: vec![C::pos(Holding, &["block"])],
        provides: vec![
            C::pos(OnTable, &["block"]),
            C::pos(HandEmpty, &[]),
            C::pos(Clear, &["block"]),
        ],
        process: "Remove Holding(block), add On(block, table), clear hand state".into(),
    };
    let stack = Operator {
        goal_name: "StackBlock".into(),
        goal_description: "Stack a held block onto another clear block.".into(),
        mechanism_name: "StackBlockMechanism".into(),
        mechanism_description: "Stack {blockToStack} on {blockTarget}.".into(),
        params: vec!["blockToStack", "blockTarget"],
        given: vec![
            C::pos(Holding, &["blockToStack"]),
            C::pos(Clear, &["blockTarget"]),
        ],
        makes: vec![
            C::pos(On, &["blockToStack", "blockTarget"]),
            C::pos(Clear, &["blockToStack"]),
            C::neg(Clear, &["blockTarget"]),
            C::pos(HandEmpty, &[]),
        ],
        requires: vec![
            C::pos(Holding, &["blockToStack"]),
            C::pos(Clear, &["blockTarget"]),
        ],
        provides: vec![
            C::pos(On, &["blockToStack", "blockTarget"]),
            C::pos(HandEmpty, &[]),
            C::pos(Clear, &["blockToStack"]),
        ],
        process: "Remove Holding(blockToStack), add On(blockToStack, blockTarget), update clear states"
            .into(),
    };
    let unstack = Operator {
        goal_name: "UnstackBlock".into(),
        goal_description: "Unstack a block from on top of another block.".into(),
        mechanism_name: "UnstackBlockMechanism".into(),
        mechanism_description: "Unstack {blockToUnstack} from {blockFrom}.".into(),
        params: vec!["blockToUnstack", "blockFrom"],
        given: vec![
            C::pos(On, &["blockToUnstack", "blockFrom"]),
            C::pos(Clear, &["blockToUnstack"]),
            C::pos(HandEmpty, &[]),
        ],
        makes: vec![
            C::pos(Holding, &["blockToUnstack"]),
            C::pos(Clear, &["blockFrom"]),
            C::neg(On, &["blockToUnstack", "blockFrom"]),
        ],
        requires: vec![
            C::pos(On, &["blockToUnstack", "blockFrom"]),
            C::pos(Clear, &["blockToUnstack"]),
            C::pos(HandEmpty, &[]),
        ],
        provides: vec![
            C::pos(Holding, &["blockToUnstack"]),
            C::pos(Clear, &["blockFrom"]),
        ],
        process:
            "Remove On(blockToUnstack, blockFrom), add Holding(blockToUnstack), update states"
                .into(),
    };
    let knowledge = TmkKnowledge {
        concepts: vec![
            entry(
                "block",
                "A block in the blocks world that can be pick up, put down, stacked or unstacked",
            ),
            entry(
                "table",
                "The surface where blocks can be pick up, put down or unstacked onto",
            ),
            entry(
                "hand",
                "The manipulator that can pick up, put down, stacked or unstacked blocks",
            ),
            entry("IsClear", "A block is clear if no other block is on top of it"),
            entry("HandIsEmpty", "The hand is not holding any block"),
        ],
        relations: vec![
            entry(
                "On",
                "Relates a block to what it's on top of (another block or table)",
            ),
            entry("Holding", "Relates the hand to the block it's holding"),
        ],
    };
    (vec![pick_up, put_down, stack, unstack], knowledge)
}

/// Prose that differs between Mystery and Random beyond plain renaming.
struct ObfuscatedText {
    goal_names: [String; 4],
    goal_descriptions: [String; 4],
    holding_relation: String,
    on_table_relation: String,
    clear_relation: String,
    hand_empty_relation: String,
    extra_concepts: Vec<KnowledgeEntry>,
}

fn obfuscated(vocab: &Vocabulary) -> (Vec<Operator>, TmkKnowledge) {
    use crate::domain::ActionKind::*;
    use Condition as C;

    let n = TmkNotation::for_vocabulary(vocab);
    let [attack, succumb, overcome, feast] =
        [PickUp, PutDown, Stack, Unstack].map(|k| vocab.action_name(k).to_string());
    let pain = n.name(Holding).to_string();
    let planet = n.name(OnTable).to_string();
    let craves = n.name(On).to_string();
    let province = n.name(Clear).to_string();
    let harmony = n.name(HandEmpty).to_string();

    let text = match vocab.variant {
        Variant::Mystery => ObfuscatedText {
            goal_names: [
                format!("{attack}Object"),
                format!("{succumb}Object"),
                format!("{overcome}Object"),
                format!("{feast}Object"),
            ],
            goal_descriptions: [
                format!("{attack} an object from the {}.", planet.to_lowercase()),
                format!("{succumb} a {pain} object onto the {}.", planet.to_lowercase()),
                format!("{overcome} a {pain} object onto another {province} object."),
                format!("{feast} an object from on top of another object (objectFrom)."),
            ],
            holding_relation: format!(
                "Unary Predicate: Relates the hand to the {pain} object by setting {pain}(object)."
            ),
            on_table_relation: format!(
                "Unary Predicate: The surface where objects can be {attack} from or {succumb} onto, represented as {planet}(object)."
            ),
            clear_relation: format!(
                "Unary Predicate: An object is {province} if no other object is on top of it, represented as {province}(object)."
            ),
            hand_empty_relation: format!(
                "Predicate: The hand is {harmony}, not {pain} any object, represented as {harmony}."
            ),
            extra_concepts: vec![],
        },
        _ => ObfuscatedText {
            goal_names: [attack.clone(), succumb.clone(), overcome.clone(), feast.clone()],
            goal_descriptions: [
                format!("{attack} an object from the {planet}."),
                format!("{succumb} a {pain} object onto the {planet}."),
                format!(
                    "{overcome} a {pain} object (objectToOvercome) onto another {province} object (objectTarget)."
                ),
                format!("{feast} an object from on top of another object (objectFrom)."),
            ],
            holding_relation: format!(
                "Unary Predicate: Relates the hand to the held object by setting {pain}(object)."
            ),
            on_table_relation: format!(
                "Unary Predicate: The surface where objects can be picked up from or put down onto, represented as {planet}(object)."
            ),
            clear_relation: format!(
                "Unary Predicate: An object is clear if no other object is on top of it, represented as {province}(object)."
            ),
            hand_empty_relation: format!(
                "Zero-arity Predicate: The hand is empty, represented as {harmony}."
            ),
            // Present in the reference Random model though no condition uses them.
            extra_concepts: vec![
                entry("isWellFormed", "Configuration follows all domain rules."),
                entry("matches", "Two configurations are identical."),
            ],
        },
    };

    let [g_attack, g_succumb, g_overcome, g_feast] = text.goal_names.clone();
    let [d_attack, d_succumb, d_overcome, d_feast] = text.goal_descriptions.clone();
    let operators = vec![
        Operator {
            mechanism_name: format!("{g_attack}Mechanism"),
            goal_name: g_attack,
            goal_description: d_attack,
            mechanism_description: format!("{attack} {{object}}."),
            params: vec!["object"],
            given: vec![
                C::pos(OnTable, &["object"]),
                C::pos(Clear, &["object"]),
                C::pos(HandEmpty, &[]),
            ],
            makes: vec![
                C::pos(Holding, &["object"]),
                C::neg(Clear, &["object"]),
                C::neg(OnTable, &["object"]),
                C::neg(HandEmpty, &[]),
            ],
            requires: vec![
                C::pos(OnTable, &["object"]),
                C::pos(Clear, &["object"]),
                C::pos(HandEmpty, &[]),
            ],
            provides: vec![
                C::pos(Holding, &["object"]),
                C::neg(HandEmpty, &[]),
                C::neg(OnTable, &["object"]),
                C::neg(Clear, &["object"]),
            ],
            process: format!(
                "Remove {planet}(object), add {pain}(object), remove {province}(object), set NOT {harmony}"
            ),
        },
        Operator {
            mechanism_name: format!("{g_succumb}Mechanism"),
            goal_name: g_succumb,
            goal_description: d_succumb,
            mechanism_description: format!("{succumb} {{object}}."),
            params: vec!["object"],
            given: vec![C::pos(Holding, &["object"])],
            makes: vec![
                C::pos(OnTable, &["object"]),
                C::pos(Clear, &["object"]),
                C::pos(HandEmpty, &[]),
                C::neg(Holding, &["object"]),
            ],
            requires: vec![C::pos(Holding, &["object"])],
            provides: vec![
                C::pos(OnTable, &["object"]),
                C::pos(HandEmpty, &[]),
                C::pos(Clear, &["object"]),
                C::neg(Holding, &["object"]),
            ],
            process: format!(
                "Remove {pain}(object), add {planet}(object), add {province}(object), set {harmony}"
            ),
        },
        Operator {
            mechanism_name: format!("{g_overcome}Mechanism"),
            goal_name: g_overcome,
            goal_description: d_overcome,
            mechanism_description: format!("{overcome} {{objectToOvercome}} on {{objectTarget}}."),
            params: vec!["objectToOvercome", "objectTarget"],
            given: vec![
                C::pos(Holding, &["objectToOvercome"]),
                C::pos(Clear, &["objectTarget"]),
            ],
            makes: vec![
                C::pos(On, &["objectToOvercome", "objectTarget"]),
                C::pos(Clear, &["objectToOvercome"]),
                C::neg(Clear, &["objectTarget"]),
                C::pos(HandEmpty, &[]),
                C::neg(Holding, &["objectToOvercome"]),
            ],
            requires: vec![
                C::pos(Holding, &["objectToOvercome"]),
                C::pos(Clear, &["objectTarget"]),
            ],
            provides: vec![
                C::pos(On, &["objectToOvercome", "objectTarget"]),
                C::pos(HandEmpty, &[]),
                C::pos(Clear, &["objectToOvercome"]),
                C::neg(Clear, &["objectTarget"]),
                C::neg(Holding, &["objectToOvercome"]),
            ],
            process: format!(
                "Remove {pain}(objectToOvercome), add {craves}(objectToOvercome, objectTarget), add {province}(objectToOvercome), remove {province}(objectTarget), set {harmony}"
            ),
        },
        Operator {
            mechanism_name: format!("{g_feast}Mechanism"),
            goal_name: g_feast,
            goal_description: d_feast,
            mechanism_description: format!("{feast} {{objectToFeast}} from {{objectFrom}}."),
            params: vec!["objectToFeast", "objectFrom"],
            given: vec![
                C::pos(On, &["objectToFeast", "objectFrom"]),
                C::pos(Clear, &["objectToFeast"]),
                C::pos(HandEmpty, &[]),
            ],
            makes: vec![
                C::pos(Holding, &["objectToFeast"]),
                C::pos(Clear, &["objectFrom"]),
                C::neg(On, &["objectToFeast", "objectFrom"]),
                C::neg(Clear, &["objectToFeast"]),
                C::neg(HandEmpty, &[]),
            ],
            requires: vec![
                C::pos(On, &["objectToFeast", "objectFrom"]),
                C::pos(Clear, &["objectToFeast"]),
                C::pos(HandEmpty, &[]),
            ],
            provides: vec![
                C::pos(Holding, &["objectToFeast"]),
                C::pos(Clear, &["objectFrom"]),
                C::neg(On, &["objectToFeast", "objectFrom"]),
                C::neg(Clear, &["objectToFeast"]),
                C::neg(HandEmpty, &[]),
            ],
            process: format!(
                "Remove {craves}(objectToFeast, objectFrom), add {pain}(objectToFeast), add {province}(objectFrom), remove {province}(objectToFeast), set NOT {harmony}"
            ),
        },
    ];

    let (object_concept, hand_concept) = match vocab.variant {
        Variant::Mystery => (
            format!(
                "An object in this domain that when is {province} can be {attack} from the {planet}, {succumb} onto the {planet}, {overcome} onto another object, or {feast} from another object."
            ),
            format!(
                "The manipulator that can {attack} a object on the {planet}, {succumb} an object onto the {planet}, {overcome} onto another object, or {feast} a {province} object from another object. When hand is {harmony} it can {attack}, or {feast} an object. When hand is {pain} object, the same object can {succumb} an object onto the {planet} or {overcome} another {province} object."
            ),
        ),
        _ => (
            format!(
                "An object in this domain that when is {province} can be {attack} from the {planet}, {succumb} onto the {planet}, {overcome} onto another object, or {feast} from another object."
            ),
            format!(
                "The manipulator that can {attack} an object from the {planet}, {succumb} an object onto the {planet}, {overcome} onto another object, or {feast} an {province} object from another object. When hand is {harmony} it can {attack} or {feast} an object. When hand is {pain} object, the same object can {succumb} an object onto the {planet} or {overcome} another {province} object."
            ),
        ),
    };
    let mut concepts = vec![
        entry("object", &object_concept),
        entry("hand", &hand_concept),
        entry("configuration", "Complete state of this domain world."),
    ];
    concepts.extend(text.extra_concepts);
    let on_relation = format!(
        "Binary Predicate: Relates an object to what it is on top of (another object), represented as {craves}(object, anotherObject)."
    );
    let knowledge = TmkKnowledge {
        concepts,
        relations: vec![
            entry(&craves, &on_relation),
            entry(&pain, &text.holding_relation),
            entry(&planet, &text.on_table_relation),
            entry(&province, &text.clear_relation),
            entry(&harmony, &text.hand_empty_relation),
        ],
    };
    (operators, knowledge)
}
