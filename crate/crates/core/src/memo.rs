//! Tiny bounded memo tables shared by the combinatorial kernels.
//!
//! The global entry budget derives from `TAUFORGE_MEMO_MB` (default 256).
//! The bound is a coarse guard against unbounded growth in long batch runs,
//! not an LRU: once a table is full, new results are simply not cached.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::{LazyLock, Mutex};

static MEMO_BUDGET_BYTES: LazyLock<usize> = LazyLock::new(|| {
    let mb = std::env::var("TAUFORGE_MEMO_MB")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(256);
    mb.saturating_mul(1024 * 1024)
});

pub struct MemoTable<K, V> {
    map: Mutex<Option<HashMap<K, V>>>,
    bytes_per_entry: usize,
}

impl<K: Eq + Hash + Clone, V: Clone> MemoTable<K, V> {
    pub const fn new(bytes_per_entry: usize) -> Self {
        MemoTable {
            map: Mutex::new(None),
            bytes_per_entry: if bytes_per_entry == 0 { 1 } else { bytes_per_entry },
        }
    }

    pub fn get(&self, key: &K) -> Option<V> {
        self.map.lock().unwrap().as_ref().and_then(|m| m.get(key).cloned())
    }

    pub fn insert(&self, key: K, value: V) {
        let mut guard = self.map.lock().unwrap();
        let map = guard.get_or_insert_with(HashMap::new);
        if (map.len() + 1).saturating_mul(self.bytes_per_entry) <= *MEMO_BUDGET_BYTES {
            map.insert(key, value);
        }
    }

    pub fn get_or_insert_with(&self, key: &K, f: impl FnOnce() -> V) -> V {
        if let Some(v) = self.get(key) {
            return v;
        }
        let v = f();
        self.insert(key.clone(), v.clone());
        v
    }
}
