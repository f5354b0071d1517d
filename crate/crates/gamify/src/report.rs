//! Plain-text reports. Output depends only on engine state, so two engines
//! built from the same log print the same bytes.

use std::fmt::Write;

use gamify_core::graph::{GraphFilter, Partition};
use gamify_core::{Engine, Error};

pub fn totals(e: &Engine) -> Result<String, Error> {
    let types: Vec<_> = e.env().achievement_types.keys().cloned().collect();
    let mut out = String::from("player\tlevel");
    for t in &types {
        let _ = write!(out, "\t{t}");
    }
    out.push('\n');
    for id in e.env().players.keys() {
        let t = e.player_totals(id.as_str())?;
        let _ = write!(out, "{id}\t{}", t.level);
        for ty in &types {
            let _ = write!(out, "\t{}", t.totals.get(ty).copied().unwrap_or(0));
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn rankings(e: &Engine, point_type: Option<&str>) -> Result<String, Error> {
    let mut out = String::from("rank\tplayer\ttotal\n");
    for (i, r) in e.global_ranking(point_type, None)?.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}\t{}", i + 1, r.player, r.total);
    }
    Ok(out)
}

fn partition(out: &mut String, name: &str, p: &Partition) {
    let _ = writeln!(out, "{name}: {} communities, modularity {:.6}", p.communities.len(), p.modularity);
    for (i, c) in p.communities.iter().enumerate() {
        let members: Vec<&str> = c.iter().map(|m| m.as_str()).collect();
        let _ = writeln!(out, "  {}\t{}", i + 1, members.join(" "));
    }
}

pub fn communities(e: &Engine, filter: &GraphFilter) -> String {
    let g = e.graph(filter);
    let mut out = String::new();
    partition(&mut out, "louvain", &g.louvain());
    partition(&mut out, "girvan-newman", &g.girvan_newman(None));
    out
}

pub fn grants(e: &Engine) -> String {
    let mut out = String::from("id\tat\tplayer\ttype\tamount\trule\tevent\tmessage\n");
    for g in e.grants() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            g.id,
            g.granted_at.to_rfc3339(),
            g.player_id,
            g.achievement_type,
            g.amount,
            g.rule_id,
            g.triggering_event_id,
            g.message
        );
    }
    out
}
