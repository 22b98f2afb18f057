use serde::{Deserialize, Serialize};

use super::{GroupContext, GroupError};

/// On-disk description of a group: `{"type":"free","m":2}` or
/// `{"type":"finite","order":n,"table":[[...]],"generators":[...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawGroupSpec")]
pub enum GroupSpec {
    Free {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
    Finite {
        order: usize,
        table: Vec<Vec<u32>>,
        generators: Vec<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<usize>,
    },
}

// Internally tagged enums buffer their content, which loses the field path
// in error messages; a flat struct keeps it.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroupSpec {
    #[serde(rename = "type")]
    kind: String,
    m: Option<usize>,
    order: Option<usize>,
    table: Option<Vec<Vec<u32>>>,
    generators: Option<Vec<u32>>,
    cap: Option<usize>,
}

impl TryFrom<RawGroupSpec> for GroupSpec {
    type Error = String;

    fn try_from(raw: RawGroupSpec) -> Result<Self, String> {
        let missing = |f: &str| format!("missing field `{f}` for type `{}`", raw.kind);
        match raw.kind.as_str() {
            "free" => {
                if raw.order.is_some() || raw.table.is_some() || raw.generators.is_some() {
                    return Err("a free group takes only `m` and `cap`".into());
                }
                Ok(GroupSpec::Free {
                    m: raw.m.ok_or_else(|| missing("m"))?,
                    cap: raw.cap,
                })
            }
            "finite" => {
                if raw.m.is_some() {
                    return Err("a finite group does not take `m`".into());
                }
                Ok(GroupSpec::Finite {
                    order: raw.order.ok_or_else(|| missing("order"))?,
                    table: raw.table.clone().ok_or_else(|| missing("table"))?,
                    generators: raw.generators.clone().ok_or_else(|| missing("generators"))?,
                    cap: raw.cap,
                })
            }
            other => Err(format!("unknown group type `{other}`, expected `free` or `finite`")),
        }
    }
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupContext, GroupError> {
        let (ctx, cap) = match self {
            GroupSpec::Free { m, cap } => (GroupContext::free(*m)?, *cap),
            GroupSpec::Finite {
                order,
                table,
                generators,
                cap,
            } => {
                if table.len() != *order {
                    return Err(GroupError::InvalidTable(format!(
                        "declared order {order} but table has {} rows",
                        table.len()
                    )));
                }
                (GroupContext::finite(table, generators)?, *cap)
            }
        };
        Ok(match cap {
            Some(c) => ctx.with_cap(c),
            None => ctx,
        })
    }
}
