//! Reading artifacts from disk and the bundled example fixtures.

use std::path::{Path, PathBuf};

use goalrank_core::{bind, BoundCatalogue, ContextSchema, GoalModel, PreferenceCatalogue, Situation};

use crate::dsl::{
    bind_diagnostics, decode, parse_catalogue_spanned, parse_context_schema, parse_goal_model, parse_situation,
    Diagnostics, SpannedCatalogue,
};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(Diagnostics),
}

impl From<Diagnostics> for LoadError {
    fn from(d: Diagnostics) -> Self {
        LoadError::Invalid(d)
    }
}

fn read(path: &Path) -> Result<Vec<u8>, LoadError> {
    std::fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

pub fn read_model(path: &Path) -> Result<GoalModel, LoadError> {
    let bytes = read(path)?;
    let file = name(path);
    Ok(parse_goal_model(&file, decode(&file, &bytes)?)?)
}

pub fn read_schema(path: &Path) -> Result<ContextSchema, LoadError> {
    let bytes = read(path)?;
    let file = name(path);
    Ok(parse_context_schema(&file, decode(&file, &bytes)?)?)
}

pub fn read_catalogue(path: &Path) -> Result<SpannedCatalogue, LoadError> {
    let bytes = read(path)?;
    let file = name(path);
    Ok(parse_catalogue_spanned(&file, decode(&file, &bytes)?)?)
}

pub fn read_situation(path: &Path, schema: &ContextSchema) -> Result<Situation, LoadError> {
    let bytes = read(path)?;
    let file = name(path);
    Ok(parse_situation(&file, decode(&file, &bytes)?, schema)?)
}

/// Binds a catalogue, reporting failures at the offending `pref` lines.
pub fn bind_spanned(
    catalogue: &SpannedCatalogue,
    model: &GoalModel,
    schema: &ContextSchema,
) -> Result<BoundCatalogue, Diagnostics> {
    bind(&catalogue.catalogue, model, schema)
        .map_err(|errs| Diagnostics(bind_diagnostics(&catalogue.spans, &catalogue.file, &errs)))
}

/// A model, schema and catalogue that belong together.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub model: GoalModel,
    pub schema: ContextSchema,
    pub catalogue: SpannedCatalogue,
}

impl Fixture {
    pub fn from_texts(name: &str, model: &str, schema: &str, catalogue: &str) -> Result<Self, Diagnostics> {
        Ok(Self {
            name: name.to_string(),
            model: parse_goal_model(&format!("{name}/model.gm"), model)?,
            schema: parse_context_schema(&format!("{name}/schema.ctx"), schema)?,
            catalogue: parse_catalogue_spanned(&format!("{name}/catalogue.prefs"), catalogue)?,
        })
    }

    /// Loads `model.gm`, `schema.ctx` and `catalogue.prefs` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, LoadError> {
        Ok(Self {
            name: dir
                .file_name()
                .map_or_else(|| name(dir), |n| n.to_string_lossy().into_owned()),
            model: read_model(&dir.join("model.gm"))?,
            schema: read_schema(&dir.join("schema.ctx"))?,
            catalogue: read_catalogue(&dir.join("catalogue.prefs"))?,
        })
    }

    pub fn prefs(&self) -> &PreferenceCatalogue {
        &self.catalogue.catalogue
    }

    pub fn bind(&self) -> Result<BoundCatalogue, Diagnostics> {
        bind_spanned(&self.catalogue, &self.model, &self.schema)
    }

    pub fn situation(&self, text: &str) -> Result<Situation, Diagnostics> {
        parse_situation("<situation>", text, &self.schema)
    }
}

/// Fixtures compiled into the crate.
pub mod bundled {
    use super::Fixture;

    pub const SCHEMA: &str = include_str!("../fixtures/medication/schema.ctx");
    pub const CATALOGUE: &str = include_str!("../fixtures/medication/catalogue.prefs");
    pub const FRAGMENT_MODEL: &str = include_str!("../fixtures/fragment/model.gm");
    pub const MEDICATION_MODEL: &str = include_str!("../fixtures/medication/model.gm");
    pub const OPTION_TWO_CATALOGUE: &str = include_str!("../fixtures/fragment/option_two.prefs");

    pub const DEMENTIA: &str = include_str!("../fixtures/fragment/situations/dementia.sit");
    pub const NORMAL: &str = include_str!("../fixtures/fragment/situations/normal.sit");
    pub const NORMAL_BAD_WEATHER: &str = include_str!("../fixtures/fragment/situations/normal_bad_weather.sit");
    pub const BUSY_TIRED: &str = include_str!("../fixtures/medication/situations/busy_tired.sit");

    fn build(name: &str, model: &str, catalogue: &str) -> Fixture {
        Fixture::from_texts(name, model, SCHEMA, catalogue).expect("bundled fixtures are valid")
    }

    /// Three-variability-point tracking subtree.
    pub fn fragment() -> Fixture {
        build("fragment", FRAGMENT_MODEL, CATALOGUE)
    }

    /// The fragment with the reprioritised softgoal catalogue.
    pub fn fragment_option_two() -> Fixture {
        build("fragment_option_two", FRAGMENT_MODEL, OPTION_TWO_CATALOGUE)
    }

    /// The full medication assistant model.
    pub fn medication() -> Fixture {
        build("medication", MEDICATION_MODEL, CATALOGUE)
    }

    pub fn all() -> Vec<Fixture> {
        vec![fragment(), fragment_option_two(), medication()]
    }
}
