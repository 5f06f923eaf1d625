use std::fs;

use gauss4d_core::synth::{ClipSource, DiskDataset};
use gauss4d_model::{load_checkpoint, Model, ModelConfig};
use gauss4d_recon::train::config::Stage;
use gauss4d_recon::train::{pretrain_3d, train_base, train_interp, Hooks, StepRecord, TrainConfig, Trained};

use crate::failure::Failure;
use crate::header::Header;
use crate::TrainArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Pretrain3d,
    Base,
    Interp,
}

struct Merged {
    train: TrainConfig,
    model: ModelConfig,
    model_keys: Vec<String>,
    train_keys: Vec<String>,
}

impl Merged {
    fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let r = match key.strip_prefix("model.") {
            Some(k) => {
                self.model_keys.push(k.to_string());
                self.model.set(k, value)
            }
            None => {
                self.train_keys.push(key.to_string());
                self.train.set(key, value)
            }
        };
        r.map_err(|e| Failure::Usage(e.to_string()))
    }

    fn text(&self) -> String {
        let mut s = self.train.to_text();
        for line in self.model.to_text().lines() {
            s.push_str("model.");
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

fn check_flags(which: Which, a: &TrainArgs) -> Result<(), Failure> {
    if a.freeze_backbone && a.random_init {
        return Err(Failure::Usage("--freeze-backbone trains only new temporal layers on top of a pretrained backbone; it contradicts --random-init".into()));
    }
    if a.freeze_backbone && a.no_temporal {
        return Err(Failure::Usage("--freeze-backbone trains only the temporal layers, which --no-temporal removes".into()));
    }
    match which {
        Which::Pretrain3d => {
            if a.freeze_backbone {
                return Err(Failure::Usage("pretrain3d has no pretrained backbone to freeze".into()));
            }
            if a.init.is_some() {
                return Err(Failure::Usage("pretrain3d always starts from random parameters; drop --init".into()));
            }
        }
        Which::Base | Which::Interp => {
            if a.init.is_none() && !a.random_init {
                return Err(Failure::Usage(format!(
                    "train {} needs --init <checkpoint> unless --random-init is given",
                    if which == Which::Base { "base" } else { "interp" }
                )));
            }
            if a.init.is_some() && a.random_init {
                return Err(Failure::Usage("--init and --random-init are mutually exclusive".into()));
            }
        }
    }
    Ok(())
}

pub fn run(which: Which, a: TrainArgs, header: &mut Header) -> Result<(), Failure> {
    check_flags(which, &a)?;
    let mut m = Merged {
        train: TrainConfig::default(),
        model: ModelConfig::tiny(),
        model_keys: Vec::new(),
        train_keys: Vec::new(),
    };
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("config {}: {e}", path.display())))?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("config {}: malformed line {line:?}", path.display())))?;
            m.set(k.trim(), v.trim())?;
        }
    }
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        m.set(k.trim(), v.trim())?;
    }
    if let Some(n) = a.steps {
        m.train.epochs = 1;
        m.train.steps_per_epoch = n;
    }
    if let Some(e) = a.epochs {
        m.train.epochs = e;
    }
    if let Some(lr) = a.lr {
        m.train.lr = lr;
    }
    if let Some(s) = a.seed {
        m.train.seed = s;
    }
    m.train.freeze_backbone |= a.freeze_backbone;
    m.train.no_temporal |= a.no_temporal;
    m.train.random_init |= a.random_init;
    m.train.validate().map_err(|e| Failure::Usage(format!("train config: {e}")))?;

    let data = DiskDataset::open(&a.data).map_err(Failure::context(format!("dataset {}", a.data.display())))?;
    let res = data.manifest().render.resolution;
    if !m.model_keys.iter().any(|k| k == "input_resolution") {
        m.model.input_resolution = res;
        if !m.model_keys.iter().any(|k| k == "output_resolution") {
            m.model.output_resolution = (res / 2).max(1);
        }
    }
    if !m.train_keys.iter().any(|k| k == "supervision_resolution") {
        m.train.supervision_resolution = m.train.supervision_resolution.min(res);
    }
    m.model.validate().map_err(|e| Failure::Usage(format!("model config: {e}")))?;
    let init = match &a.init {
        Some(p) => Some(load_checkpoint(p).map_err(Failure::context(format!("init checkpoint {}", p.display())))?),
        None => None,
    };

    let stage = match which {
        Which::Pretrain3d => Stage::Pretrain3d,
        Which::Base => Stage::Base4d,
        Which::Interp => Stage::Interp,
    };
    m.train.stage = stage;
    header.set("stage", stage);
    header.set("seed", m.train.seed);
    header.set("data", a.data.display());
    header.set("out", a.out.display());
    header.set("init", a.init.as_ref().map_or("none".to_string(), |p| p.display().to_string()));
    header.set("stop_at_psnr", a.stop_at_psnr.map_or("none".to_string(), |v| v.to_string()));
    header.dump("", &m.text());
    header.print();

    fs::create_dir_all(&a.out).map_err(|e| Failure::Data(format!("cannot create {}: {e}", a.out.display())))?;
    fs::write(a.out.join("config.txt"), m.text())?;
    let every = a.log_every;
    let mut on_step = |r: &StepRecord| {
        if every > 0 && (r.step + 1) % every == 0 {
            eprintln!("{}", r.line());
        }
    };
    let mut hooks = Hooks {
        on_step: Some(&mut on_step),
        on_epoch: None,
        checkpoint_dir: Some(&a.out),
        stop_at_psnr: a.stop_at_psnr,
    };
    let trained: Trained = match which {
        Which::Pretrain3d => pretrain_3d(&m.train, &m.model, &data, &mut hooks)?,
        Which::Base => train_base(&m.train, &m.model, &data, init.as_ref().map(|c| (&c.config, &c.params)), &mut hooks)?,
        Which::Interp => match &init {
            Some(c) => train_interp(&m.train, &data, (&c.config, &c.params), &mut hooks)?,
            None => {
                let p = Model::new(&m.model)?.init_params(m.train.seed);
                train_interp(&m.train, &data, (&m.model, &p), &mut hooks)?
            }
        },
    };
    fs::write(a.out.join("train.log"), trained.log.to_text())?;
    let best = if trained.log.steps.is_empty() {
        "n/a".to_string()
    } else {
        format!("{:.3}", trained.log.best_psnr())
    };
    println!(
        "steps={} best_psnr={best} checkpoint={}",
        trained.log.steps.len(),
        a.out.join(format!("{}.g4ck", stage)).display()
    );
    Ok(())
}

