//! The project file: program context, paragraph, suggestion registry and
//! the persisted authoring session.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use transdoc_agents::{Clock, Session};
use transdoc_core::doc::{Document, TargetFragment, TextSpan};
use transdoc_core::eval::{Dataset, EnvError, Sources};

/// A table given inline or as a path to a JSON file of rows, relative to
/// the project file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Path(String),
    Inline(Dataset),
}

/// A fragment proposed by the suggestion agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisteredFragment {
    pub id: u64,
    pub span: TextSpan,
    pub text: String,
}

impl RegisteredFragment {
    pub fn target(&self) -> TargetFragment {
        TargetFragment { span: self.span, text: self.text.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectFile {
    pub datasets: IndexMap<String, DatasetSource>,
    /// Paths of definition files, relative to the project file.
    #[serde(default)]
    pub imports: Vec<String>,
    #[serde(default)]
    pub code: String,
    /// The paragraph as first authored.
    pub paragraph: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paragraph_value: Option<String>,
    #[serde(default)]
    pub fragments: Vec<RegisteredFragment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<Session>,
}

#[derive(Debug, thiserror::Error)]
pub enum ProjectError {
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: std::io::Error },
    #[error("{path}: {error}")]
    Json { path: PathBuf, error: serde_json::Error },
    #[error(transparent)]
    Context(#[from] EnvError),
}

fn read(path: &Path) -> Result<String, ProjectError> {
    std::fs::read_to_string(path).map_err(|error| ProjectError::Io { path: path.to_path_buf(), error })
}

/// A loaded project: the file as read plus its resolved program context
/// and live session.
#[derive(Debug, Clone)]
pub struct Project {
    pub path: PathBuf,
    pub file: ProjectFile,
    pub sources: Arc<Sources>,
    pub session: Session,
}

impl Project {
    /// Loads a project, starting a fresh session if none is stored.
    pub fn load(path: &Path, clock: &dyn Clock) -> Result<Self, ProjectError> {
        let file: ProjectFile = serde_json::from_str(&read(path)?)
            .map_err(|error| ProjectError::Json { path: path.to_path_buf(), error })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut sources = Sources { code: file.code.clone(), ..Sources::default() };
        for (name, src) in &file.datasets {
            let ds = match src {
                DatasetSource::Inline(ds) => ds.clone(),
                DatasetSource::Path(p) => {
                    let p = dir.join(p);
                    serde_json::from_str(&read(&p)?).map_err(|error| ProjectError::Json { path: p, error })?
                }
            };
            sources.datasets.insert(name.clone(), ds);
        }
        for import in &file.imports {
            sources.imports.push(read(&dir.join(import))?);
        }
        // Surface broken context at load time rather than on first use.
        sources.env()?;
        let sources = Arc::new(sources);
        let session = match &file.session {
            Some(s) => {
                let mut s = s.clone();
                s.attach_sources(sources.clone());
                s
            }
            None => Session::new(Document::new(&file.paragraph, (*sources).clone()), clock),
        };
        Ok(Self { path: path.to_path_buf(), file, sources, session })
    }

    pub fn head(&self) -> &Document {
        self.session.head()
    }

    pub fn to_json(&self) -> String {
        let mut file = self.file.clone();
        file.session = Some(self.session.clone());
        let mut out = serde_json::to_string_pretty(&file).expect("project serializes");
        out.push('\n');
        out
    }

    /// Writes the project, replacing the file atomically.
    pub fn save(&self) -> Result<(), ProjectError> {
        let tmp = self.path.with_extension("json.tmp");
        let io = |error| ProjectError::Io { path: self.path.clone(), error };
        std::fs::write(&tmp, self.to_json()).map_err(io)?;
        std::fs::rename(&tmp, &self.path).map_err(io)
    }
}
