//! Global string interner backing block and node identifiers.
//!
//! Interning is injective: equal strings intern to equal symbols, distinct
//! strings to distinct symbols. Interned names live for the process lifetime,
//! which is what an analysis tool wants (the symbol universe is bounded by
//! its inputs).

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

/// An interned identifier. Cheap to copy, compare and hash.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u32);

#[derive(Default)]
struct Interner {
    by_name: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

static TABLE: Lazy<Mutex<Interner>> = Lazy::new(|| Mutex::new(Interner::default()));

/// Interns `name`, returning its symbol.
pub fn intern(name: &str) -> Symbol {
    let mut table = TABLE.lock().unwrap();
    if let Some(&id) = table.by_name.get(name) {
        return Symbol(id);
    }
    let id = u32::try_from(table.names.len()).expect("interner overflow");
    let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
    table.names.push(leaked);
    table.by_name.insert(leaked, id);
    Symbol(id)
}

impl Symbol {
    /// The interned string.
    pub fn as_str(self) -> &'static str {
        TABLE.lock().unwrap().names[self.0 as usize]
    }

    /// Raw id, used by canonical state keys. Stable within a process run.
    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
