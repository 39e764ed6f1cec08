use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::SystemTime;

use intervene_core::{parse_network, Network};

use crate::error::ApiError;
use crate::manifest::Manifest;

const MODEL_SUFFIX: &str = ".json";
const MANIFEST_SUFFIX: &str = ".manifest.json";

#[derive(Debug)]
pub struct LoadedModel {
    pub id: String,
    pub network: Network,
    pub manifest: Manifest,
}

/// File identity used to notice edits on disk.
type Stamp = Option<(SystemTime, u64)>;

fn stamp(path: &Path) -> Stamp {
    let meta = std::fs::metadata(path).ok()?;
    Some((meta.modified().ok()?, meta.len()))
}

/// Models read from one directory: `<id>.json` plus an optional
/// `<id>.manifest.json`. Parsed models are cached until either file changes.
#[derive(Debug)]
pub struct ModelStore {
    dir: PathBuf,
    cache: RwLock<HashMap<String, (Stamp, Stamp, Arc<LoadedModel>)>>,
}

/// Ids are plain file stems, so a request can never leave the directory.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && !id.starts_with('.')
        && !id.ends_with(".manifest")
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl ModelStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Model ids in lexicographic order. A missing directory lists nothing.
    pub fn ids(&self) -> Vec<String> {
        let Ok(entries) = std::fs::read_dir(&self.dir) else {
            return Vec::new();
        };
        let mut ids: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|name| !name.ends_with(MANIFEST_SUFFIX))
            .filter_map(|name| name.strip_suffix(MODEL_SUFFIX).map(str::to_string))
            .filter(|id| valid_id(id))
            .collect();
        ids.sort();
        ids
    }

    pub fn get(&self, id: &str) -> Result<Arc<LoadedModel>, ApiError> {
        if !valid_id(id) {
            return Err(ApiError::not_found("model", id));
        }
        let model_path = self.dir.join(format!("{id}{MODEL_SUFFIX}"));
        let manifest_path = self.dir.join(format!("{id}{MANIFEST_SUFFIX}"));
        let (model_stamp, manifest_stamp) = (stamp(&model_path), stamp(&manifest_path));
        if model_stamp.is_none() {
            return Err(ApiError::not_found("model", id));
        }
        if let Some((a, b, m)) = self.cache.read().unwrap().get(id) {
            if *a == model_stamp && *b == manifest_stamp {
                return Ok(m.clone());
            }
        }
        let text = std::fs::read_to_string(&model_path)
            .map_err(|e| ApiError::internal(format!("reading model `{id}`: {e}")))?;
        let network = parse_network(&text)
            .map_err(|e| ApiError::internal(format!("model `{id}` is invalid: {e}")))?;
        let manifest = match std::fs::read_to_string(&manifest_path) {
            Ok(text) => {
                let m = Manifest::from_json(&text)
                    .map_err(|e| ApiError::internal(format!("manifest of `{id}`: {e}")))?;
                m.check(&network)
                    .map_err(|e| ApiError::internal(format!("manifest of `{id}`: {e}")))?;
                m
            }
            Err(_) => Manifest::default(),
        };
        let model = Arc::new(LoadedModel {
            id: id.to_string(),
            network,
            manifest,
        });
        self.cache
            .write()
            .unwrap()
            .insert(id.to_string(), (model_stamp, manifest_stamp, model.clone()));
        Ok(model)
    }
}
