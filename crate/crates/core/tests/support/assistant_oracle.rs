//! Exhaustive matcher for the dialogue brain: tries every split of the
//! input against every category and ranks all matches.

use gamify_core::assistant::Brain;
use rand::Rng;

pub const VOCAB: [&str; 5] = ["HELP", "WHAT", "IS", "A", "LEVEL"];

/// Does `pattern` (words and "*") match `input` with every "*" taking one
/// or more words? Enumerates all ways to cut the input.
pub fn matches(pattern: &[String], input: &[String]) -> bool {
    match pattern.split_first() {
        None => input.is_empty(),
        Some((p, rest)) if p == "*" => (1..=input.len()).any(|k| matches(rest, &input[k..])),
        Some((p, rest)) => input.first() == Some(p) && matches(rest, &input[1..]),
    }
}

/// The winning pattern text: fewest wildcards, then smallest text.
pub fn choose(patterns: &[Vec<String>], input: &[String]) -> Option<String> {
    let mut scored: Vec<(usize, String)> = patterns
        .iter()
        .filter(|p| matches(p, input))
        .map(|p| (p.iter().filter(|w| *w == "*").count(), p.join(" ")))
        .collect();
    scored.sort();
    scored.into_iter().next().map(|(_, text)| text)
}

pub fn random_pattern(rng: &mut impl Rng) -> Vec<String> {
    let len = rng.gen_range(1..=4);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.3) {
                "*".to_string()
            } else {
                VOCAB[rng.gen_range(0..VOCAB.len())].to_string()
            }
        })
        .collect()
}

pub fn brain_source(patterns: &[Vec<String>]) -> String {
    let mut s = String::from("<aiml>\n");
    for (i, p) in patterns.iter().enumerate() {
        s.push_str(&format!(
            "<category><pattern>{}</pattern><template>T{i}</template></category>\n",
            p.join(" ")
        ));
    }
    s.push_str("</aiml>\n");
    s
}

#[derive(Debug, Default, Clone)]
pub struct AssistantReport {
    pub brains: usize,
    pub inputs: usize,
    pub matched: usize,
}

pub fn run_matcher_oracle(seed: u64, brains: usize, inputs_per_brain: usize) -> Result<AssistantReport, String> {
    let mut rng = super::rng(seed);
    let mut report = AssistantReport::default();
    while report.brains < brains {
        let mut patterns: Vec<Vec<String>> = Vec::new();
        for _ in 0..rng.gen_range(1..=5) {
            let p = random_pattern(&mut rng);
            if !patterns.contains(&p) {
                patterns.push(p);
            }
        }
        let brain = Brain::load([("oracle.aiml", brain_source(&patterns).as_str())])
            .map_err(|e| format!("brain failed to load: {e}"))?;
        report.brains += 1;
        for _ in 0..inputs_per_brain {
            let words: Vec<String> = (0..rng.gen_range(1..=5))
                .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].to_string())
                .collect();
            // Vary case and punctuation; the matcher must not care.
            let raw: Vec<String> = words
                .iter()
                .map(|w| match rng.gen_range(0..3) {
                    0 => w.to_lowercase(),
                    1 => format!("{w}?"),
                    _ => w.clone(),
                })
                .collect();
            let input = raw.join(" ");
            let want = choose(&patterns, &words);
            let got = brain.select(&input).map(|(c, _)| c.pattern_text());
            if got != want {
                return Err(format!("patterns {patterns:?}, input {input:?}: engine {got:?}, oracle {want:?}"));
            }
            let reply = brain.respond(&input);
            let expected_reply = match &want {
                Some(text) => format!("T{}", patterns.iter().position(|p| p.join(" ") == *text).unwrap()),
                None => gamify_core::assistant::DEFAULT_FALLBACK.to_string(),
            };
            if reply != expected_reply {
                return Err(format!("input {input:?}: reply {reply:?}, expected {expected_reply:?}"));
            }
            report.inputs += 1;
            report.matched += usize::from(want.is_some());
        }
    }
    Ok(report)
}
