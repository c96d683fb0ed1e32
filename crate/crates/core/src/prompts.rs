//! Prompt templates and few-shot exemplars.
//!
//! The built-in set is compiled from `prompts/`; a directory with files of
//! the same names overrides any subset of them. Placeholders are written
//! `{{name}}`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::taxonomy::{compatible_scenes, icap_level, Action, Scene};
use crate::vlm::StructuredLabel;

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

/// A worked example: what a clip looks like and its correct coding.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Exemplar {
    pub description: String,
    pub scenes: Vec<Scene>,
    pub actions: Vec<Action>,
}

impl Exemplar {
    pub fn label(&self) -> StructuredLabel {
        StructuredLabel {
            scenes: self.scenes.iter().copied().collect(),
            actions: self.actions.iter().copied().collect(),
            ..Default::default()
        }
    }
}

#[derive(Deserialize)]
struct ExemplarFile {
    exemplar: Vec<Exemplar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    pub system: String,
    pub single: String,
    pub scene: String,
    pub icvp: String,
    pub guidance: BTreeMap<Scene, String>,
    pub react: String,
    pub classify: String,
    pub exemplars: Vec<Exemplar>,
}

fn parse_exemplars(text: &str, path: &str) -> Result<Vec<Exemplar>, PromptError> {
    let file: ExemplarFile =
        toml::from_str(text).map_err(|e| PromptError::File { path: path.to_string(), message: e.to_string() })?;
    if file.exemplar.is_empty() {
        return Err(PromptError::File { path: path.to_string(), message: "no exemplars".into() });
    }
    Ok(file.exemplar)
}

impl PromptSet {
    pub fn builtin() -> Self {
        PromptSet {
            system: include_str!("../prompts/system.txt").to_string(),
            single: include_str!("../prompts/single.txt").to_string(),
            scene: include_str!("../prompts/scene.txt").to_string(),
            icvp: include_str!("../prompts/icvp.txt").to_string(),
            guidance: [
                (Scene::Gai, include_str!("../prompts/guidance_gai.txt").to_string()),
                (Scene::Web, include_str!("../prompts/guidance_web.txt").to_string()),
                (Scene::Docs, include_str!("../prompts/guidance_docs.txt").to_string()),
            ]
            .into(),
            react: include_str!("../prompts/react.txt").to_string(),
            classify: include_str!("../prompts/classify.txt").to_string(),
            exemplars: parse_exemplars(include_str!("../prompts/exemplars.toml"), "exemplars.toml")
                .expect("built-in exemplars parse"),
        }
    }

    /// The built-in set with every file present in `dir` substituted.
    pub fn load(dir: &Path) -> Result<Self, PromptError> {
        let mut set = Self::builtin();
        let read = |name: &str| -> Result<Option<String>, PromptError> {
            let path = dir.join(name);
            match fs::read_to_string(&path) {
                Ok(t) => Ok(Some(t)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(PromptError::File { path: path.display().to_string(), message: e.to_string() }),
            }
        };
        for (name, slot) in [
            ("system.txt", &mut set.system),
            ("single.txt", &mut set.single),
            ("scene.txt", &mut set.scene),
            ("icvp.txt", &mut set.icvp),
            ("react.txt", &mut set.react),
            ("classify.txt", &mut set.classify),
        ] {
            if let Some(t) = read(name)? {
                *slot = t;
            }
        }
        for scene in Scene::ALL {
            if let Some(t) = read(&format!("guidance_{}.txt", scene.as_str()))? {
                set.guidance.insert(scene, t);
            }
        }
        if let Some(t) = read("exemplars.toml")? {
            set.exemplars = parse_exemplars(&t, &dir.join("exemplars.toml").display().to_string())?;
        }
        Ok(set)
    }

    /// The system prompt with the scene list and action scheme filled in.
    pub fn system_text(&self) -> String {
        fill(&self.system, &[("scenes", &scene_list()), ("actions", &action_table())])
    }
}

/// Replaces each `{{key}}` in `template`.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in values {
        out = out.replace(&format!("{{{{{k}}}}}"), v);
    }
    out
}

pub fn scene_list() -> String {
    Scene::ALL
        .iter()
        .map(|s| format!("- {}: {}", s.as_str(), s.display_name()))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn action_table() -> String {
    Action::ALL
        .iter()
        .map(|&a| {
            let scenes: Vec<&str> = compatible_scenes(a).iter().map(|s| s.as_str()).collect();
            format!("- {} [{}; {}]: {}", a.as_str(), scenes.join(", "), icap_level(a), a.description())
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_templates_have_tags() {
        let p = PromptSet::builtin();
        for t in [&p.single, &p.scene, &p.icvp, &p.react, &p.classify] {
            assert!(t.contains("{{tag}}"));
        }
        assert_eq!(p.exemplars.len(), 6);
        assert_eq!(p.guidance.len(), 3);
        let sys = p.system_text();
        assert!(sys.contains("prompting_gai [gai; constructive]"), "{sys}");
        assert!(!sys.contains("{{"));
    }

    #[test]
    fn directory_overrides() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("scene.txt"), "custom {{tag}}").unwrap();
        let p = PromptSet::load(dir.path()).unwrap();
        assert_eq!(p.scene, "custom {{tag}}");
        assert_eq!(p.single, PromptSet::builtin().single);
        fs::write(dir.path().join("exemplars.toml"), "exemplar = []").unwrap();
        assert!(PromptSet::load(dir.path()).is_err());
    }

    #[test]
    fn fill_replaces_all() {
        assert_eq!(fill("{{a}}-{{b}}-{{a}}", &[("a", "1"), ("b", "2")]), "1-2-1");
    }
}
