//! Dataset directory layout:
//!
//! ```text
//! <root>/objects.txt                       object_id<TAB>display name
//! <root>/<object_id>/<exploration_id>.touches
//! ```

use std::fs;
use std::path::Path;

use super::format::{parse_exploration, serialize_exploration};
use super::types::{validate_identifier, Exploration};
use crate::error::{Error, Result};
use crate::numfmt::{atomic_write, read_to_string};

const OBJECTS_FILE: &str = "objects.txt";
const TOUCH_EXT: &str = "touches";

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRecord {
    pub object_id: String,
    pub display_name: String,
    /// `(exploration_id, exploration)` sorted by id.
    pub explorations: Vec<(String, Exploration)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub objects: Vec<ObjectRecord>,
}

impl Dataset {
    pub fn load(root: &Path) -> Result<Self> {
        let listing = read_to_string(&root.join(OBJECTS_FILE))?;
        let mut objects = Vec::new();
        for (idx, raw) in listing.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, name) = line.split_once('\t').unwrap_or((line, line));
            validate_identifier(id).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
            let dir = root.join(id);
            if !dir.is_dir() {
                return Err(Error::MissingInput(dir));
            }
            let mut files: Vec<_> = fs::read_dir(&dir)
                .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == TOUCH_EXT))
                .collect();
            files.sort();
            let mut explorations = Vec::with_capacity(files.len());
            for path in files {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .ok_or_else(|| Error::invalid(format!("bad file name {}", path.display())))?
                    .to_string();
                let text = read_to_string(&path)?;
                let e = parse_exploration(id, &text).map_err(|e| match e {
                    Error::Parse { line, message } => Error::Parse {
                        line,
                        message: format!("{}: {message}", path.display()),
                    },
                    other => other,
                })?;
                explorations.push((stem, e));
            }
            objects.push(ObjectRecord {
                object_id: id.to_string(),
                display_name: name.to_string(),
                explorations,
            });
        }
        Ok(Self { objects })
    }

    /// Writes every file atomically. Existing unrelated files are left alone.
    pub fn write(&self, root: &Path) -> Result<()> {
        let mut listing = String::new();
        for obj in &self.objects {
            validate_identifier(&obj.object_id)?;
            listing.push_str(&obj.object_id);
            listing.push('\t');
            listing.push_str(&obj.display_name);
            listing.push('\n');
            for (eid, e) in &obj.explorations {
                validate_identifier(eid)?;
                let path = root.join(&obj.object_id).join(format!("{eid}.{TOUCH_EXT}"));
                atomic_write(&path, serialize_exploration(e).as_bytes())?;
            }
        }
        atomic_write(&root.join(OBJECTS_FILE), listing.as_bytes())
    }

    pub fn object_ids(&self) -> Vec<&str> {
        self.objects.iter().map(|o| o.object_id.as_str()).collect()
    }

    pub fn index_of(&self, object_id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.object_id == object_id)
    }
}
