use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use blindpe_service::clock::SystemClock;
use blindpe_service::collector::{Collector, ServiceConfig};
use blindpe_service::study::Study;

use crate::{Failure, Outcome};

pub struct Args {
    pub prepared: PathBuf,
    pub journal: PathBuf,
    pub host: String,
    pub port: u16,
    pub deadline_minutes: u32,
    pub instructions: Option<String>,
    pub operator_token: String,
}

pub fn run(args: Args) -> Outcome {
    if args.operator_token.trim().is_empty() {
        return Err(Failure::Usage("operator token must not be empty".into()));
    }
    if args.deadline_minutes == 0 {
        return Err(Failure::Usage("--deadline-minutes must be at least 1".into()));
    }
    let nested = args.prepared.join("raters");
    let dir = if nested.is_dir() { nested } else { args.prepared.clone() };
    let study = Study::load_dir(&dir).with_context(|| format!("cannot load prepared documents from {}", dir.display()))?;

    let mut config = ServiceConfig::new(args.operator_token);
    config.deadline_minutes = args.deadline_minutes;
    if let Some(text) = args.instructions {
        config.instructions = text;
    }
    let collector = Collector::open(study, config, Arc::new(SystemClock), &args.journal)
        .with_context(|| format!("cannot open journal {}", args.journal.display()))?;

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))?;
        eprintln!("listening on {}", listener.local_addr()?);
        blindpe_service::api::serve(listener, Arc::new(collector), async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        anyhow::Ok(())
    })?;
    Ok(())
}
