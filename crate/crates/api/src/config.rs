use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use frmp_core::{Catalog, Error, JunctionId, Result, User, UserId, UserRole, VehicleProfile, DEFAULT_SNAP_TOLERANCE_M};

/// Service configuration, read from TOML.
///
/// ```toml
/// listen = "127.0.0.1:8080"
/// public_read = false
/// depot = 1
/// catalog_path = "catalog.toml"
///
/// [[users]]
/// id = "am1"
/// display_name = "Forest office manager"
/// role = "AM"
/// token = "change-me"
///
/// [[profiles]]
/// name = "logging-truck"
/// speed_kmh = 14.0
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    /// Serve GET endpoints (and route planning) without a token.
    #[serde(default)]
    pub public_read: bool,
    /// Junction repair crews start from, used for cost estimates.
    #[serde(default = "default_depot")]
    pub depot: JunctionId,
    #[serde(default = "default_snap")]
    pub snap_tolerance_m: f64,
    /// Problem-type catalog; relative paths resolve against the config file.
    #[serde(default)]
    pub catalog_path: Option<PathBuf>,
    #[serde(default)]
    pub users: Vec<UserEntry>,
    #[serde(default)]
    pub profiles: Vec<VehicleProfile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub id: UserId,
    #[serde(default)]
    pub display_name: String,
    pub role: UserRole,
    pub token: String,
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_depot() -> JunctionId {
    JunctionId(1)
}

fn default_snap() -> f64 {
    DEFAULT_SNAP_TOLERANCE_M
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: default_listen(),
            public_read: false,
            depot: default_depot(),
            snap_tolerance_m: default_snap(),
            catalog_path: None,
            users: Vec::new(),
            profiles: Vec::new(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Parse {
            index: None,
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_toml_str(&text)?;
        if let (Some(rel), Some(dir)) = (&config.catalog_path, path.parent()) {
            if rel.is_relative() {
                config.catalog_path = Some(dir.join(rel));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snap_tolerance_m.is_nan() || self.snap_tolerance_m < 0.0 {
            return Err(Error::Validation("snap_tolerance_m must be non-negative".into()));
        }
        let mut tokens = HashMap::new();
        for u in &self.users {
            if u.token.trim().is_empty() {
                return Err(Error::Validation(format!("user {} has an empty token", u.id)));
            }
            if tokens.insert(u.token.as_str(), &u.id).is_some() {
                return Err(Error::Validation(format!("token of user {} is not unique", u.id)));
            }
        }
        for p in &self.profiles {
            p.validate()?;
        }
        Ok(())
    }

    /// Configured profiles, or the default logging truck when none are set.
    pub fn profiles(&self) -> Vec<VehicleProfile> {
        if self.profiles.is_empty() {
            vec![VehicleProfile::default()]
        } else {
            self.profiles.clone()
        }
    }

    pub fn catalog(&self) -> Result<Option<Catalog>> {
        match &self.catalog_path {
            None => Ok(None),
            Some(path) => Catalog::from_toml_str(&std::fs::read_to_string(path)?).map(Some),
        }
    }

    pub fn store_users(&self) -> Vec<User> {
        self.users
            .iter()
            .map(|u| User {
                id: u.id.clone(),
                display_name: u.display_name.clone(),
                role: u.role,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = Config::from_toml_str("").unwrap();
        assert_eq!(c.listen.port(), 8080);
        assert!(!c.public_read);
        assert_eq!(c.depot, JunctionId(1));
        assert_eq!(c.profiles()[0].speed_kmh, 14.0);
    }

    #[test]
    fn users_and_profiles() {
        let c = Config::from_toml_str(
            r#"
            public_read = true
            [[users]]
            id = "am1"
            role = "AM"
            token = "t-am"
            [[profiles]]
            name = "pickup"
            speed_kmh = 25.0
            "#,
        )
        .unwrap();
        assert_eq!(c.store_users()[0].role, UserRole::Am);
        assert_eq!(c.profiles()[0].name, "pickup");
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Config::from_toml_str("listen = 5").is_err());
        assert!(Config::from_toml_str("colour = \"red\"").is_err());
        let dup = r#"
            [[users]]
            id = "a"
            role = "AM"
            token = "x"
            [[users]]
            id = "b"
            role = "CCO"
            token = "x"
        "#;
        assert!(Config::from_toml_str(dup).is_err());
        assert!(Config::from_toml_str("[[profiles]]\nname = \"x\"\nspeed_kmh = 0.0").is_err());
    }
}
