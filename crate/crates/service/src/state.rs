use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use gks_core::export::{GksRecord, Snapshot};
use gks_core::{Gks, InformationTable};

/// One immutable revision of the registries.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    pub revision: u64,
    pub tables: BTreeMap<String, Arc<InformationTable>>,
    pub structures: BTreeMap<String, Arc<Gks>>,
}

impl Registry {
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            revision: self.revision,
            tables: self
                .tables
                .iter()
                .map(|(k, t)| (k.clone(), (**t).clone()))
                .collect(),
            structures: self
                .structures
                .iter()
                .map(|(k, g)| (k.clone(), GksRecord::from(&**g)))
                .collect(),
        }
    }

    pub fn from_snapshot(snapshot: Snapshot) -> gks_core::Result<Self> {
        let tables: BTreeMap<String, Arc<InformationTable>> = snapshot
            .tables
            .into_iter()
            .map(|(k, t)| (k, Arc::new(t)))
            .collect();
        let mut structures = BTreeMap::new();
        for (name, record) in snapshot.structures {
            let table = tables.get(&record.table).ok_or_else(|| {
                gks_core::Error::Schema(format!("{name}: table {:?} not in snapshot", record.table))
            })?;
            structures.insert(name, Arc::new(record.into_gks(table)?));
        }
        Ok(Registry {
            revision: snapshot.revision,
            tables,
            structures,
        })
    }
}

/// Named tables and structures behind a single-writer lock. Readers take
/// an `Arc` to the current revision and never see a half-applied change.
#[derive(Debug, Default)]
pub struct SessionState {
    current: RwLock<Arc<Registry>>,
    writer: Mutex<()>,
}

impl SessionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_registry(registry: Registry) -> Self {
        SessionState {
            current: RwLock::new(Arc::new(registry)),
            writer: Mutex::new(()),
        }
    }

    pub fn read(&self) -> Arc<Registry> {
        Arc::clone(&self.current.read().unwrap_or_else(PoisonError::into_inner))
    }

    /// Applies `f` to a copy of the current registry and publishes it under
    /// the next revision if `f` succeeds.
    pub fn mutate<T, E>(
        &self,
        f: impl FnOnce(&mut Registry) -> Result<T, E>,
    ) -> Result<(u64, T), E> {
        let _guard = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let mut next = (*self.read()).clone();
        let out = f(&mut next)?;
        next.revision += 1;
        let revision = next.revision;
        *self.current.write().unwrap_or_else(PoisonError::into_inner) = Arc::new(next);
        Ok((revision, out))
    }
}
