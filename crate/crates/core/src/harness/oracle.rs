//! A deliberately plain re-derivation of the argv rules, kept apart from the
//! presenter so the two can be compared.

use crate::presenter::WidgetValue;
use crate::spec::GuiSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    UnknownWidget,
    StateTypeMismatch,
    MissingRequiredFile,
}

fn lookup<'a>(state: &'a [(String, WidgetValue)], id: &str) -> Option<&'a WidgetValue> {
    let mut found = None;
    for (k, v) in state {
        if k == id {
            found = Some(v);
        }
    }
    found
}

fn is_blank(s: &str) -> bool {
    s.chars().all(char::is_whitespace)
}

fn numeric_ok(kind: &str, text: &str) -> bool {
    match kind {
        "int" => text.parse::<i64>().is_ok(),
        "float" => match text.parse::<f64>() {
            Ok(x) => x.is_finite(),
            Err(_) => false,
        },
        _ => true,
    }
}

/// argv for `state` (pairs of widget id and value) under `spec`.
pub fn oracle_command(spec: &GuiSpec, state: &[(String, WidgetValue)]) -> Result<Vec<String>, OracleError> {
    // Every key must name a flag widget.
    for (id, _) in state {
        if !spec.flags.iter().any(|b| &b.widget_id == id) {
            return Err(OracleError::UnknownWidget);
        }
    }
    // Values must suit their flag, checked in spec order.
    for b in &spec.flags {
        let Some(value) = lookup(state, &b.widget_id) else {
            continue;
        };
        let kind = serde_json::to_value(b.flag.kind).unwrap();
        let kind = kind.as_str().unwrap();
        match (kind, value) {
            ("bool", WidgetValue::Bool(_)) => {}
            ("bool", WidgetValue::Text(_)) => return Err(OracleError::StateTypeMismatch),
            (_, WidgetValue::Bool(_)) => return Err(OracleError::StateTypeMismatch),
            (_, WidgetValue::Text(t)) => {
                let t = t.trim();
                if !t.is_empty() {
                    if !numeric_ok(kind, t) {
                        return Err(OracleError::StateTypeMismatch);
                    }
                    if kind == "enum" && !b.flag.choices.iter().any(|c| c.as_str() == t) {
                        return Err(OracleError::StateTypeMismatch);
                    }
                }
            }
        }
    }

    let mut argv = Vec::new();
    argv.push(spec.meta.exe.clone());
    for b in &spec.flags {
        let value = lookup(state, &b.widget_id);
        let required = serde_json::to_value(b.flag.kind).unwrap() == "infile"
            && b.flag.default.is_empty()
            && b.flag.label.trim_end().ends_with('*');
        match value {
            Some(WidgetValue::Bool(true)) => argv.push(b.flag.token.clone()),
            Some(WidgetValue::Text(t)) if !is_blank(t) => {
                argv.push(b.flag.token.clone());
                argv.push(t.trim().to_string());
            }
            _ => {
                if required {
                    return Err(OracleError::MissingRequiredFile);
                }
            }
        }
    }
    Ok(argv)
}
