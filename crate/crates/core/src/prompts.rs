//! Prompt text for generation and for LLM-backed scoring.

use serde::{Deserialize, Serialize};

const SYSTEM: &str = "You are an expert reasoner with a deep understanding of logical connections and relationships. \
Your task is to analyze the given reasoning paths and provide clear and accurate answers to the questions based on these paths. \
Based on the reasoning paths, please answer the given question.";

const INPUT_LEAD: &str = "Based on the reasoning paths, please answer the given question and explain why.";

const QUERY_INSTRUCTION: &str = "Now answer the following question, you only need to output answer, nothing else! \
Make sure your answer contains the entities of the above REASONING PATHS.";

struct Shot {
    paths: &'static [&'static str],
    question: &'static str,
    output: &'static [&'static str],
}

const NORTHERN_DISTRICT: Shot = Shot {
    paths: &["Northern District -> location.administrative_division.first_level_division_of -> Israel -> government.form_of_government.countries -> Parliamentary system"],
    question: "What type of government is used in the country with Northern District?",
    output: &[
        "Parliamentary system",
        "Explanation:",
        "1. \"Northern District\" is a location within some country.",
        "2. The reasoning path mentions \"Northern District -> location.administrative_division.first_level_division_of -> Israel,\" indicating that the Northern District is part of Israel.",
        "3. It further states \"Israel -> government.form_of_government.countries,\" suggesting that Israel's form of government is being discussed.",
        "4. The last part of the reasoning path indicates that Israel has a \"Parliamentary system.\"",
        "Therefore, based on the provided reasoning paths, it can be concluded that the type of government used in the country with the Northern District (Israel) is a Parliamentary system.",
    ],
};

const WORLD_SERIES_1946: Shot = Shot {
    paths: &[
        "1946 World Series -> sports.sports_team.championships -> St. Louis Cardinals -> sports.sports_team.arena_stadium -> Busch Stadium",
        "1946 World Series -> sports.sports_team.championships -> St. Louis Cardinals -> sports.sports_team.arena_stadium -> Roger Dean Stadium",
    ],
    question: "Where is the home stadium of the team who won the 1946 World Series championship?",
    output: &[
        "Busch Stadium",
        "Explanation:",
        "1. 1946 World Series -> sports.sports_team.championships -> St. Louis Cardinals -> sports.sports_team.arena_stadium -> Busch Stadium",
        "The reasoning path leads us to the St. Louis Cardinals as the team that won the 1946 World Series, and Busch Stadium is the stadium associated with the St. Louis Cardinals. \
Therefore, Busch Stadium is the home stadium of the team that won the 1946 World Series championship.",
    ],
};

const LOU_SEAL: Shot = Shot {
    paths: &["Lou Seal -> sports.mascot.team -> San Francisco Giants -> sports.sports_championship_event.champion -> 2014 World Series"],
    question: "Lou Seal is the mascot for the team that last won the World Series when?",
    output: &[
        "Lou Seal is the mascot for the team that last won the World Series in 2014.",
        "Explanation:",
        "1. The reasoning path starts with \"Lou Seal\" and links it to \"sports.mascot.team.\"",
        "2. From there, it leads to \"San Francisco Giants,\" indicating that Lou Seal is the mascot for the San Francisco Giants.",
        "3. The path then continues to \"sports.sports_championship_event.champion -> 2014 World Series,\" which tells us that the San Francisco Giants were the champions of the 2014 World Series.",
        "Therefore, based on the provided reasoning paths, it can be concluded that the San Francisco Giants, represented by Lou Seal, last won the World Series in 2014.",
    ],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shots {
    ZeroShot,
    OneShot,
    FewShot,
}

impl Shots {
    /// Accepts `0`, `1`, `few` and the snake-case names.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "0" | "zero" | "zero_shot" => Some(Self::ZeroShot),
            "1" | "one" | "one_shot" => Some(Self::OneShot),
            "few" | "few_shot" => Some(Self::FewShot),
            _ => None,
        }
    }

    fn shots(self) -> &'static [Shot] {
        match self {
            Self::ZeroShot => &[],
            Self::OneShot => &[LOU_SEAL],
            Self::FewShot => &[NORTHERN_DISTRICT, WORLD_SERIES_1946, LOU_SEAL],
        }
    }
}

fn input_block(out: &mut String, paths: &str, question: &str) {
    out.push_str("Reasoning Paths:\n\n");
    out.push_str(paths);
    out.push_str("\n\nQuestion:\n\n");
    out.push_str(question);
}

/// Generation template with two fill slots: the reasoning paths (one per
/// line) and the question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub shots: Shots,
}

impl PromptTemplate {
    pub fn new(shots: Shots) -> Self {
        Self { shots }
    }

    pub fn render(&self, path_lines: &[String], question: &str) -> String {
        let paths = path_lines.join("\n");
        let mut out = String::from(SYSTEM);
        let shots = self.shots.shots();
        if shots.is_empty() {
            out.push_str("\n\n");
            input_block(&mut out, &paths, question);
            out.push('\n');
            return out;
        }
        out.push_str("\n\n# Examples");
        for shot in shots {
            out.push_str("\n\n## Input:\n\n");
            out.push_str(INPUT_LEAD);
            out.push_str("\n\n");
            input_block(&mut out, &shot.paths.join("\n\n"), shot.question);
            out.push_str("\n\n## Output:\n\n");
            out.push_str(&shot.output.join("\n\n"));
        }
        out.push_str("\n\n# Query\n\n");
        out.push_str(QUERY_INSTRUCTION);
        out.push_str("\n\n## Input:\n\n");
        out.push_str(INPUT_LEAD);
        out.push_str("\n\n");
        input_block(&mut out, &paths, question);
        out.push('\n');
        out
    }
}

const SCORE_INSTRUCTION: &str = "Please score the relations (separated by semicolon) that contribute to the question \
on a scale from 0 to 1 (the sum of the scores of all relations is 1).";

const SCORE_EXAMPLE: &str = "Q: Name the president of the country whose main spoken language was Brahui in 1980?
Topic Entity: Brahui Language
Relations: language.human_language.main_country
language.human_language.countries_spoken_in
base.rosetta.languoid.parent
kg.object_profile.prominent_type
Score: 0.4, 0.3, 0.2, 0.0
language.human_language.main_country is highly relevant as it directly relates to the country whose president is being asked for, and the main country where Brahui language is spoken in 1980.
language.human_language.countries_spoken_in is also relevant as it provides information on the countries where Brahui language is spoken, which could help narrow down the search for the president.
base.rosetta.languoid.parent is less relevant but still provides some context on the language family to which Brahui belongs, which could be useful in understanding the linguistic and cultural background of the country in question.
kg.object_profile.prominent_type is not relevant and contributes nothing to the question.";

/// Scoring prompt with one worked example; candidates are listed one per line.
pub fn score_prompt(question: &str, topic_entity: &str, candidates: &[&str]) -> String {
    format!(
        "{SCORE_INSTRUCTION}\n{SCORE_EXAMPLE}\n\nQ: {question}\nTopic Entity: {topic_entity}\nRelations: {}\n",
        candidates.join("\n")
    )
}
