//! A persistent workspace: ingest, index, run, label, then reopen the state
//! directory and show that everything came back.
//!
//! cargo run --example workspace_state -- [state-dir]

use kgdedup::fixtures::{EVENT_TYPE, RUNNING_EXAMPLE_NT};
use kgdedup::workspace::{SpecSource, Workspace, WorkspaceOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp;
    let root = match std::env::args().nth(1) {
        Some(dir) => std::path::PathBuf::from(dir),
        None => {
            tmp = std::env::temp_dir().join(format!("kgdedup-example-{}", std::process::id()));
            tmp
        }
    };
    {
        let mut ws = Workspace::open(&root, WorkspaceOptions::default())?;
        let g = ws.add_graph("events", RUNNING_EXAMPLE_NT)?;
        let i = ws.create_index(&g.id, EVENT_TYPE, SpecSource::Emergent, None, 1)?;
        let p = ws.create_pair(&i.id, &i.id)?;
        let results = ws.run_now(&p.id)?.to_vec();
        for r in &results {
            ws.record_label(&p.id, &r.source_id, &r.target_id, true)?;
        }
        println!("wrote {} to {}", p.id, root.display());
    }
    let ws = Workspace::open(&root, WorkspaceOptions::default())?;
    for pair in ws.pairs() {
        println!(
            "{}: version {}, {} labels, {} results, metrics {:?}",
            pair.id,
            pair.version,
            ws.labels(&pair.id)?.len(),
            ws.all_results(&pair.id)?.len(),
            ws.metrics(&pair.id)?
        );
    }
    Ok(())
}
