//! Scene / action / ICAP taxonomy for on-screen collaborative-learning behaviors.
//!
//! Every action belongs to exactly one engagement level and is observable in a
//! fixed, non-empty set of scenes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The on-screen context in which an action happens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scene {
    /// Generative-AI chat interface.
    Gai,
    /// Web content (search engines, articles).
    Web,
    /// The shared group document.
    Docs,
}

impl Scene {
    pub const ALL: [Scene; 3] = [Scene::Gai, Scene::Web, Scene::Docs];

    pub fn as_str(self) -> &'static str {
        match self {
            Scene::Gai => "gai",
            Scene::Web => "web",
            Scene::Docs => "docs",
        }
    }

    /// Human-readable name used in prompts.
    pub fn display_name(self) -> &'static str {
        match self {
            Scene::Gai => "Generative AI interface",
            Scene::Web => "Web content",
            Scene::Docs => "Group documents",
        }
    }
}

/// One of the eight observable on-screen behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    SearchingInternet,
    TickingAnswers,
    ReadingWithHighlighting,
    CopyAndPaste,
    #[serde(rename = "prompting_gai")]
    PromptingGai,
    GroupDocumentCoEditing,
    ReadingWithScrolling,
    Freezing,
}

impl Action {
    pub const ALL: [Action; 8] = [
        Action::SearchingInternet,
        Action::TickingAnswers,
        Action::ReadingWithHighlighting,
        Action::CopyAndPaste,
        Action::PromptingGai,
        Action::GroupDocumentCoEditing,
        Action::ReadingWithScrolling,
        Action::Freezing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::SearchingInternet => "searching_internet",
            Action::TickingAnswers => "ticking_answers",
            Action::ReadingWithHighlighting => "reading_with_highlighting",
            Action::CopyAndPaste => "copy_and_paste",
            Action::PromptingGai => "prompting_gai",
            Action::GroupDocumentCoEditing => "group_document_co_editing",
            Action::ReadingWithScrolling => "reading_with_scrolling",
            Action::Freezing => "freezing",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Action::SearchingInternet => "Searching Internet",
            Action::TickingAnswers => "Ticking Answers",
            Action::ReadingWithHighlighting => "Reading with Highlighting",
            Action::CopyAndPaste => "Copy and Paste",
            Action::PromptingGai => "Prompting GAI",
            Action::GroupDocumentCoEditing => "Group Document Co-Editing",
            Action::ReadingWithScrolling => "Reading with Scrolling",
            Action::Freezing => "Freezing",
        }
    }

    /// Behavior definition text, used when rendering prompts.
    pub fn description(self) -> &'static str {
        match self {
            Action::SearchingInternet => {
                "Searching information using search engines or other digital sources."
            }
            Action::TickingAnswers => {
                "Completing or correcting answers in multiple-choice questions."
            }
            Action::ReadingWithHighlighting => {
                "Reading while highlighting text on screen using the cursor/mouse."
            }
            Action::CopyAndPaste => {
                "Copying selected content and pasting it into the shared group document."
            }
            Action::PromptingGai => "Constructing prompts for a generative AI tool.",
            Action::GroupDocumentCoEditing => {
                "Editing a shared group document, including deleting, adding, and revising content."
            }
            Action::ReadingWithScrolling => {
                "Reading content while scrolling up/down (optionally with cursor movement)."
            }
            Action::Freezing => "No on-screen actions detected.",
        }
    }
}

/// ICAP engagement level, extended with `Conceal` for frozen screens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcapLevel {
    Active,
    Constructive,
    Interactive,
    Passive,
    Conceal,
}

impl IcapLevel {
    pub const ALL: [IcapLevel; 5] = [
        IcapLevel::Active,
        IcapLevel::Constructive,
        IcapLevel::Interactive,
        IcapLevel::Passive,
        IcapLevel::Conceal,
    ];
}

/// Scenes in which `action` can be observed. Never empty.
pub fn compatible_scenes(action: Action) -> BTreeSet<Scene> {
    match action {
        Action::SearchingInternet => BTreeSet::from([Scene::Web]),
        Action::TickingAnswers | Action::GroupDocumentCoEditing => BTreeSet::from([Scene::Docs]),
        Action::PromptingGai => BTreeSet::from([Scene::Gai]),
        Action::ReadingWithHighlighting
        | Action::CopyAndPaste
        | Action::ReadingWithScrolling
        | Action::Freezing => Scene::ALL.into_iter().collect(),
    }
}

pub fn is_compatible(action: Action, scene: Scene) -> bool {
    compatible_scenes(action).contains(&scene)
}

pub fn icap_level(action: Action) -> IcapLevel {
    match action {
        Action::SearchingInternet
        | Action::TickingAnswers
        | Action::ReadingWithHighlighting
        | Action::CopyAndPaste => IcapLevel::Active,
        Action::PromptingGai => IcapLevel::Constructive,
        Action::GroupDocumentCoEditing => IcapLevel::Interactive,
        Action::ReadingWithScrolling => IcapLevel::Passive,
        Action::Freezing => IcapLevel::Conceal,
    }
}

/// An action whose compatible scenes do not intersect the record's scenes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub action: Action,
    pub compatible: BTreeSet<Scene>,
}

/// Returns every action that cannot occur in any of `scenes`.
///
/// `Freezing` with an empty scene set is allowed: a frozen screen may carry no
/// recognisable scene.
pub fn check_compatibility(scenes: &BTreeSet<Scene>, actions: &BTreeSet<Action>) -> Vec<Violation> {
    actions
        .iter()
        .filter(|&&a| !(a == Action::Freezing && scenes.is_empty()))
        .filter_map(|&a| {
            let compatible = compatible_scenes(a);
            if compatible.is_disjoint(scenes) {
                Some(Violation { action: a, compatible })
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} name {name:?}")]
pub struct UnknownName {
    pub kind: &'static str,
    pub name: String,
}

fn normalize(name: &str) -> String {
    name.trim()
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect()
}

impl FromStr for Scene {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize(s).as_str() {
            "gai" | "gai_interface" | "generative_ai" | "generative_ai_interface" => Ok(Scene::Gai),
            "web" | "web_content" => Ok(Scene::Web),
            "docs" | "doc" | "group_documents" | "group_document" | "documents" => Ok(Scene::Docs),
            _ => Err(UnknownName { kind: "scene", name: s.to_string() }),
        }
    }
}

impl FromStr for Action {
    type Err = UnknownName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = normalize(s);
        Action::ALL
            .into_iter()
            .find(|a| a.as_str() == n || normalize(a.display_name()) == n)
            .ok_or_else(|| UnknownName { kind: "action", name: s.to_string() })
    }
}

impl fmt::Display for Scene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for IcapLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IcapLevel::Active => "active",
            IcapLevel::Constructive => "constructive",
            IcapLevel::Interactive => "interactive",
            IcapLevel::Passive => "passive",
            IcapLevel::Conceal => "conceal",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icap_table_rows() {
        let expected = [
            (Action::SearchingInternet, IcapLevel::Active),
            (Action::TickingAnswers, IcapLevel::Active),
            (Action::ReadingWithHighlighting, IcapLevel::Active),
            (Action::CopyAndPaste, IcapLevel::Active),
            (Action::PromptingGai, IcapLevel::Constructive),
            (Action::GroupDocumentCoEditing, IcapLevel::Interactive),
            (Action::ReadingWithScrolling, IcapLevel::Passive),
            (Action::Freezing, IcapLevel::Conceal),
        ];
        for (action, level) in expected {
            assert_eq!(icap_level(action), level, "{action}");
        }
    }

    #[test]
    fn scene_column() {
        assert_eq!(compatible_scenes(Action::PromptingGai), BTreeSet::from([Scene::Gai]));
        assert_eq!(compatible_scenes(Action::SearchingInternet), BTreeSet::from([Scene::Web]));
        assert_eq!(compatible_scenes(Action::TickingAnswers), BTreeSet::from([Scene::Docs]));
        assert_eq!(
            compatible_scenes(Action::GroupDocumentCoEditing),
            BTreeSet::from([Scene::Docs])
        );
        assert_eq!(compatible_scenes(Action::ReadingWithScrolling).len(), 3);
        for a in Action::ALL {
            assert!(!compatible_scenes(a).is_empty());
        }
    }

    #[test]
    fn compatibility_examples() {
        let web = BTreeSet::from([Scene::Web]);
        assert!(check_compatibility(&web, &BTreeSet::from([Action::SearchingInternet])).is_empty());
        let v = check_compatibility(&web, &BTreeSet::from([Action::PromptingGai]));
        assert_eq!(
            v,
            vec![Violation { action: Action::PromptingGai, compatible: BTreeSet::from([Scene::Gai]) }]
        );
        assert!(check_compatibility(&BTreeSet::new(), &BTreeSet::from([Action::Freezing])).is_empty());
        // any other action needs a scene
        assert_eq!(
            check_compatibility(&BTreeSet::new(), &BTreeSet::from([Action::ReadingWithScrolling]))
                .len(),
            1
        );
    }

    #[test]
    fn names_round_trip() {
        for a in Action::ALL {
            assert_eq!(a.as_str().parse::<Action>().unwrap(), a);
            assert_eq!(a.display_name().parse::<Action>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.as_str()));
        }
        for s in Scene::ALL {
            assert_eq!(s.as_str().parse::<Scene>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.as_str()));
        }
        assert!("flying".parse::<Action>().is_err());
    }
}
