use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::vocabulary::Variant;

use super::{Condition, KnowledgeEntry, TmkGoal, TmkKnowledge, TmkMechanism, TmkModel, TmkNotation};

/// JSON shape for condition lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dialect {
    /// `["On(block, table)", "NOT HandIsEmpty()"]`
    StringList,
    /// `{"Planet(object)": true, "Harmony": false}`
    BooleanMap,
}

impl Dialect {
    /// The shape each builtin variant's reference TMK uses.
    pub fn for_variant(variant: Variant) -> Dialect {
        match variant {
            Variant::Classic => Dialect::StringList,
            Variant::Mystery | Variant::Random => Dialect::BooleanMap,
        }
    }
}

impl std::str::FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "string-list" | "strings" => Ok(Dialect::StringList),
            "boolean-map" | "booleans" => Ok(Dialect::BooleanMap),
            other => Err(format!("unknown dialect `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TmkParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing or malformed field `{0}`")]
    Field(String),
    #[error("cannot read condition `{text}` in {owner}")]
    Condition { owner: String, text: String },
    #[error("document does not match any builtin TMK notation")]
    NoNotation,
}

fn conditions_json(notation: &TmkNotation, conds: &[Condition], dialect: Dialect) -> Value {
    match dialect {
        Dialect::StringList => Value::Array(
            conds
                .iter()
                .map(|c| Value::String(notation.render(c)))
                .collect(),
        ),
        Dialect::BooleanMap => {
            let mut map = Map::new();
            for c in conds {
                map.insert(notation.render_literal(c), Value::Bool(c.positive));
            }
            Value::Object(map)
        }
    }
}

fn entries_json(entries: &[KnowledgeEntry]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|e| json!({"name": e.name, "description": e.description}))
            .collect(),
    )
}

/// Renders `model` as two-space-indented JSON with keys in reference order.
pub fn serialize_tmk(model: &TmkModel, dialect: Dialect) -> String {
    let n = &model.notation;
    let goals: Vec<Value> = model
        .goals
        .iter()
        .map(|g| {
            json!({
                "name": g.name,
                "description": g.description,
                "inputParameters": g.input_parameters,
                "outputParameters": g.output_parameters,
                "given": conditions_json(n, &g.given, dialect),
                "makes": conditions_json(n, &g.makes, dialect),
                "mechanism": g.mechanism,
            })
        })
        .collect();
    let mechanisms: Vec<Value> = model
        .mechanisms
        .iter()
        .map(|m| {
            json!({
                "name": m.name,
                "description": m.description,
                "inputParameters": m.input_parameters,
                "outputParameters": m.output_parameters,
                "type": m.kind,
                "requires": conditions_json(n, &m.requires, dialect),
                "provides": conditions_json(n, &m.provides, dialect),
                "process": m.process,
            })
        })
        .collect();
    let doc = json!({
        "Goals": goals,
        "Mechanisms": mechanisms,
        "Knowledge": {
            "Concepts": entries_json(&model.knowledge.concepts),
            "Relations": entries_json(&model.knowledge.relations),
        },
    });
    serde_json::to_string_pretty(&doc).expect("TMK JSON is always serializable")
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value, TmkParseError> {
    obj.get(key).ok_or_else(|| TmkParseError::Field(key.into()))
}

fn string(obj: &Value, key: &str) -> Result<String, TmkParseError> {
    field(obj, key)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| TmkParseError::Field(key.into()))
}

fn string_list(obj: &Value, key: &str) -> Result<Vec<String>, TmkParseError> {
    field(obj, key)?
        .as_array()
        .and_then(|items| {
            items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
        })
        .ok_or_else(|| TmkParseError::Field(key.into()))
}

fn parse_conditions(
    notation: &TmkNotation,
    obj: &Value,
    key: &str,
    owner: &str,
    params: &[String],
) -> Result<Vec<Condition>, TmkParseError> {
    let bad = |text: &str| TmkParseError::Condition {
        owner: format!("{owner}.{key}"),
        text: text.to_string(),
    };
    match field(obj, key)? {
        Value::Array(items) => items
            .iter()
            .map(|v| {
                let text = v.as_str().ok_or_else(|| bad(&v.to_string()))?;
                notation.parse(text, params).ok_or_else(|| bad(text))
            })
            .collect(),
        Value::Object(map) => map
            .iter()
            .map(|(text, polarity)| {
                let positive = polarity.as_bool().ok_or_else(|| bad(text))?;
                let mut cond = notation.parse(text, params).ok_or_else(|| bad(text))?;
                if text.trim_start().starts_with("NOT ") {
                    return Err(bad(text));
                }
                cond.positive = positive;
                Ok(cond)
            })
            .collect(),
        _ => Err(TmkParseError::Field(key.into())),
    }
}

fn parse_entries(obj: &Value, key: &str) -> Result<Vec<KnowledgeEntry>, TmkParseError> {
    field(obj, key)?
        .as_array()
        .ok_or_else(|| TmkParseError::Field(key.into()))?
        .iter()
        .map(|e| {
            Ok(KnowledgeEntry {
                name: string(e, "name")?,
                description: string(e, "description")?,
            })
        })
        .collect()
}

/// Reads a TMK document in either dialect using `notation`.
pub fn parse_tmk(text: &str, notation: &TmkNotation) -> Result<TmkModel, TmkParseError> {
    let doc: Value = serde_json::from_str(text)?;
    let goals = field(&doc, "Goals")?
        .as_array()
        .ok_or_else(|| TmkParseError::Field("Goals".into()))?
        .iter()
        .map(|g| {
            let name = string(g, "name")?;
            let input_parameters = string_list(g, "inputParameters")?;
            Ok(TmkGoal {
                description: string(g, "description")?,
                output_parameters: string_list(g, "outputParameters")?,
                given: parse_conditions(notation, g, "given", &name, &input_parameters)?,
                makes: parse_conditions(notation, g, "makes", &name, &input_parameters)?,
                mechanism: string(g, "mechanism")?,
                input_parameters,
                name,
            })
        })
        .collect::<Result<Vec<_>, TmkParseError>>()?;
    let mechanisms = field(&doc, "Mechanisms")?
        .as_array()
        .ok_or_else(|| TmkParseError::Field("Mechanisms".into()))?
        .iter()
        .map(|m| {
            let name = string(m, "name")?;
            let input_parameters = string_list(m, "inputParameters")?;
            Ok(TmkMechanism {
                description: string(m, "description")?,
                output_parameters: string_list(m, "outputParameters")?,
                kind: string(m, "type")?,
                requires: parse_conditions(notation, m, "requires", &name, &input_parameters)?,
                provides: parse_conditions(notation, m, "provides", &name, &input_parameters)?,
                process: string(m, "process")?,
                prose: m
                    .get("provides")
                    .and_then(Value::as_array)
                    .into_iter()
                    .flatten()
                    .filter_map(Value::as_str)
                    .filter(|text| {
                        notation
                            .informal
                            .iter()
                            .any(|(phrase, _, _)| text.trim().eq_ignore_ascii_case(phrase))
                    })
                    .map(str::to_string)
                    .collect(),
                input_parameters,
                name,
            })
        })
        .collect::<Result<Vec<_>, TmkParseError>>()?;
    let knowledge = field(&doc, "Knowledge")?;
    Ok(TmkModel {
        goals,
        mechanisms,
        knowledge: TmkKnowledge {
            concepts: parse_entries(knowledge, "Concepts")?,
            relations: parse_entries(knowledge, "Relations")?,
        },
        notation: notation.clone(),
    })
}

/// Reads a TMK document written in any builtin variant's notation.
pub fn parse_tmk_any(text: &str) -> Result<(Variant, TmkModel), TmkParseError> {
    let mut last = TmkParseError::NoNotation;
    for variant in Variant::ALL {
        match parse_tmk(text, &TmkNotation::for_variant(variant)) {
            Ok(model) => return Ok((variant, model)),
            Err(e @ TmkParseError::Json(_)) => return Err(e),
            Err(e) => last = e,
        }
    }
    Err(last)
}
