use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainType {
    pub name: String,
    pub subtypes: Vec<String>,
}

/// Two-level event vocabulary. Subtype ids are global and follow the order
/// of declaration, so main type 0's subtypes come first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub main_types: Vec<MainType>,
}

impl Taxonomy {
    pub fn new(main_types: Vec<MainType>) -> Result<Self> {
        let t = Self { main_types };
        t.validate()?;
        Ok(t)
    }

    /// `ticket` with a single subtype and `error` split into six components.
    pub fn ticket_error() -> Self {
        let sub = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            main_types: vec![
                MainType {
                    name: "ticket".into(),
                    subtypes: sub(&["ticket"]),
                },
                MainType {
                    name: "error".into(),
                    subtypes: sub(&["PRT", "CNG", "IDC", "COMM", "LMTP", "MISC"]),
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.main_types.is_empty() {
            return Err(invalid("taxonomy has no main types"));
        }
        let mut mains = HashSet::new();
        let mut subs = HashSet::new();
        for m in &self.main_types {
            if !mains.insert(&m.name) {
                return Err(invalid(format!("duplicate main type `{}`", m.name)));
            }
            if m.subtypes.is_empty() {
                return Err(invalid(format!("main type `{}` has no subtypes", m.name)));
            }
            for s in &m.subtypes {
                if !subs.insert(s) {
                    return Err(invalid(format!("duplicate subtype `{s}`")));
                }
            }
        }
        Ok(())
    }

    pub fn k_main(&self) -> usize {
        self.main_types.len()
    }

    pub fn k_sub(&self) -> usize {
        self.main_types.iter().map(|m| m.subtypes.len()).sum()
    }

    pub fn main_names(&self) -> Vec<String> {
        self.main_types.iter().map(|m| m.name.clone()).collect()
    }

    pub fn sub_names(&self) -> Vec<String> {
        self.main_types
            .iter()
            .flat_map(|m| m.subtypes.iter().cloned())
            .collect()
    }

    /// Parent main type of every subtype id.
    pub fn parents(&self) -> Vec<usize> {
        self.main_types
            .iter()
            .enumerate()
            .flat_map(|(k, m)| std::iter::repeat_n(k, m.subtypes.len()))
            .collect()
    }

    pub fn main_id(&self, name: &str) -> Option<usize> {
        self.main_types.iter().position(|m| m.name == name)
    }

    pub fn sub_id(&self, name: &str) -> Option<usize> {
        self.sub_names().iter().position(|s| s == name)
    }
}
