use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::http::header::AUTHORIZATION;
use axum::http::HeaderMap;

use frmp_core::network::NetworkGraph;
use frmp_core::{build_graph, Clock, Mutation, Revision, Store, StoreSnapshot, SystemClock, UserId, UserRole, VehicleProfile};

use crate::config::Config;
use crate::error::ApiError;

/// Who is calling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Caller {
    Anonymous,
    User { id: UserId, role: UserRole },
}

impl Caller {
    pub fn role(&self) -> Option<UserRole> {
        match self {
            Caller::Anonymous => None,
            Caller::User { role, .. } => Some(*role),
        }
    }
}

/// What an endpoint needs from its caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// Any user; anonymous callers too when public reads are on.
    Read,
    /// CCO or AM.
    Edit,
    /// AM only.
    Manage,
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    store: Store,
    clock: Arc<dyn Clock>,
    public_read: bool,
    depot: frmp_core::JunctionId,
    snap_tolerance_m: f64,
    tokens: HashMap<String, (UserId, UserRole)>,
    profiles: Vec<VehicleProfile>,
    graph: Mutex<Option<(Revision, Arc<NetworkGraph>)>>,
}

impl AppState {
    /// Wraps an open store. Users from the config (and its catalog, when one
    /// is configured) are written to the store if they differ from what it
    /// holds.
    pub fn new(config: &Config, store: Store) -> frmp_core::Result<Self> {
        Self::with_clock(config, store, Arc::new(SystemClock))
    }

    pub fn with_clock(config: &Config, store: Store, clock: Arc<dyn Clock>) -> frmp_core::Result<Self> {
        config.validate()?;
        let catalog = config.catalog()?;
        let users = config.store_users();
        store.transact(|snap| {
            let mut batch = Vec::new();
            if let Some(c) = catalog.filter(|c| *c != snap.catalog) {
                batch.push(Mutation::SetCatalog(c));
            }
            for u in users {
                if snap.users.get(&u.id) != Some(&u) {
                    batch.push(Mutation::PutUser(u));
                }
            }
            Ok::<_, frmp_core::Error>(((), batch))
        })?;
        let tokens = config
            .users
            .iter()
            .map(|u| (u.token.clone(), (u.id.clone(), u.role)))
            .collect();
        Ok(AppState {
            inner: Arc::new(Inner {
                store,
                clock,
                public_read: config.public_read,
                depot: config.depot,
                snap_tolerance_m: config.snap_tolerance_m,
                tokens,
                profiles: config.profiles(),
                graph: Mutex::new(None),
            }),
        })
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn clock(&self) -> &dyn Clock {
        &*self.inner.clock
    }

    pub fn depot(&self) -> frmp_core::JunctionId {
        self.inner.depot
    }

    pub fn profiles(&self) -> &[VehicleProfile] {
        &self.inner.profiles
    }

    pub fn profile(&self, name: Option<&str>) -> Result<&VehicleProfile, ApiError> {
        match name {
            None => Ok(&self.inner.profiles[0]),
            Some(n) => self
                .inner
                .profiles
                .iter()
                .find(|p| p.name == n)
                .ok_or_else(|| ApiError::validation(format!("unknown profile {n:?}"))),
        }
    }

    /// The routable graph for `snap`, rebuilt only when segments changed.
    pub fn graph(&self, snap: &StoreSnapshot) -> Result<Arc<NetworkGraph>, ApiError> {
        let key = snap.segments_revision();
        let mut cached = self.inner.graph.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((rev, g)) = cached.as_ref() {
            if *rev == key {
                return Ok(Arc::clone(g));
            }
        }
        let g = Arc::new(build_graph(snap.segments.values().cloned(), self.inner.snap_tolerance_m)?);
        *cached = Some((key, Arc::clone(&g)));
        Ok(g)
    }

    pub fn caller(&self, headers: &HeaderMap) -> Result<Caller, ApiError> {
        let Some(value) = headers.get(AUTHORIZATION) else {
            return Ok(Caller::Anonymous);
        };
        let token = value
            .to_str()
            .ok()
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(ApiError::unauthorized)?;
        let (id, role) = self.inner.tokens.get(token).ok_or_else(ApiError::unauthorized)?;
        Ok(Caller::User {
            id: id.clone(),
            role: *role,
        })
    }

    pub fn authorize(&self, headers: &HeaderMap, access: Access) -> Result<Caller, ApiError> {
        let caller = self.caller(headers)?;
        let allowed = match (access, caller.role()) {
            (Access::Read, None) => self.inner.public_read,
            (Access::Read | Access::Edit, Some(_)) => true,
            (Access::Manage, Some(UserRole::Am)) => true,
            _ => false,
        };
        if allowed {
            Ok(caller)
        } else {
            Err(ApiError::forbidden(match access {
                Access::Read => "sign in to read",
                Access::Edit => "requires a CCO or AM account",
                Access::Manage => "requires an AM account",
            }))
        }
    }
}
