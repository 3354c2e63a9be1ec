//! Writes offline LLM fixtures (`<prompt digest>.txt`) from a file of
//! scripted answers, by running the mining pipeline against them.
//!
//! cargo run -p ipverify-core --example seed_fixtures -- \
//!     fixtures/fg333/fg333.json fixtures/fg333/llm_responses.json fixtures/fg333/llm

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;

use ipverify_core::knowledge::parse_knowledge_model;
use ipverify_core::llm::{FnModel, LlmError, DEFAULT_MODEL};
use ipverify_core::mining::{mine, MiningConfig};
use serde::Deserialize;

#[derive(Deserialize)]
struct Scripted {
    id: u32,
    filter: String,
    standardize: String,
    translate: String,
}

fn explicit_of(answer: &str) -> String {
    let body = answer.split_once("Standardized Requirement:").map_or(answer, |(_, b)| b);
    body.lines().next().unwrap_or("").trim().trim_matches('"').trim().to_string()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [model_path, responses, out_dir] = &args[..] else {
        eprintln!("usage: seed_fixtures <knowledge.json> <responses.json> <out_dir>");
        std::process::exit(64);
    };
    let doc = parse_knowledge_model(model_path.as_ref())?;
    let scripted: Vec<Scripted> = serde_json::from_str(&std::fs::read_to_string(responses)?)?;
    let raw_text = |id: u32| doc.requirement(id).map(|r| r.raw_text.clone()).unwrap_or_default();

    let recorded = Mutex::new(BTreeMap::new());
    let model = FnModel::new(DEFAULT_MODEL, |req| {
        let p = &req.user_prompt;
        let answer = if p.contains("Natural Language:") {
            scripted.iter().find(|s| p.contains(&explicit_of(&s.standardize))).map(|s| &s.translate)
        } else if p.contains("Knowledge model table:") {
            scripted.iter().find(|s| p.contains(&raw_text(s.id))).map(|s| &s.standardize)
        } else {
            scripted.iter().find(|s| p.contains(&raw_text(s.id))).map(|s| &s.filter)
        };
        let answer = answer.ok_or_else(|| LlmError::InvalidRequest("no scripted answer for prompt".into()))?;
        recorded.lock().unwrap().insert(req.digest(), answer.clone());
        Ok(answer.clone())
    });
    let out = mine(&doc, &model, &MiningConfig { jobs: 1, ..Default::default() });
    for e in &out.errors {
        eprintln!("warning: {e}");
    }

    let dir = PathBuf::from(out_dir);
    std::fs::create_dir_all(&dir)?;
    let recorded = recorded.into_inner().unwrap();
    for (digest, text) in &recorded {
        std::fs::write(dir.join(format!("{digest}.txt")), text)?;
    }
    println!("wrote {} fixtures to {}; {} properties mined", recorded.len(), dir.display(), out.properties.len());
    Ok(())
}
