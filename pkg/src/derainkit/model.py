"""Full deraining pipeline: filter-based detail extraction, streak and
feature networks, feature-domain subtraction and the reconstruction
branch, plus the training loop."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .filters import FilterParams, decompose
from .image import validate_image
from .metrics import MetricReport, psnr, ssim
from .nn import (
    RRG,
    Adam,
    Conv2d,
    Module,
    Tensor,
    cosine_lr,
    l1_loss,
    load_checkpoint,
    save_checkpoint,
)
from .rain import PairedSample, random_crop

ARCH_KEY = "derainkit-arch"


@dataclass
class TrainConfig:
    batch: int = 8
    crop: int = 128
    lr_max: float = 2e-4
    lr_min: float = 1e-6
    total_steps: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.crop < 16:
            raise ValueError("crop must be >= 16")
        if not self.lr_max > self.lr_min > 0:
            raise ValueError("need lr_max > lr_min > 0")
        if self.total_steps < 0:
            raise ValueError("total_steps must be >= 0")


@dataclass
class PipelineConfig:
    feature_channels: int = 32
    reduction: int = 4
    use_iwgif: bool = True
    use_feature_net: bool = True
    use_derb: bool = True
    filter_params: FilterParams = field(default_factory=FilterParams)
    train: TrainConfig = field(default_factory=TrainConfig)


class _FeatureNet(Module):
    """Two residual groups and a conv, in feature space."""

    def __init__(self, channels: int, reduction: int, rng):
        self.rrg1 = RRG(channels, reduction, rng)
        self.rrg2 = RRG(channels, reduction, rng)
        self.conv = Conv2d(channels, channels, 3, rng)

    def forward(self, x):
        return self.conv(self.rrg2(self.rrg1(x)))


class _StreakNet(Module):
    """Conv in, two residual groups, conv back to image channels."""

    def __init__(self, channels: int, reduction: int, rng):
        self.conv_in = Conv2d(3, channels, 3, rng)
        self.rrg1 = RRG(channels, reduction, rng)
        self.rrg2 = RRG(channels, reduction, rng)
        self.conv_out = Conv2d(channels, 3, 3, rng)

    def forward(self, x):
        return self.conv_out(self.rrg2(self.rrg1(self.conv_in(x))))


class _Derb(Module):
    """Reconstruction branch: four residual groups and a conv."""

    def __init__(self, channels: int, reduction: int, rng):
        self.rrgs = [RRG(channels, reduction, rng) for _ in range(4)]
        self.conv = Conv2d(channels, channels, 3, rng)

    def forward(self, x):
        for rrg in self.rrgs:
            x = rrg(x)
        return self.conv(x)


class DerainModel(Module):
    def __init__(self, feature_channels: int = 32, reduction: int = 4, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.feature_channels = feature_channels
        self.reduction = reduction
        self.streak_net = _StreakNet(feature_channels, reduction, rng)
        self.head = Conv2d(3, feature_channels, 3, rng)
        self.feat_i = _FeatureNet(feature_channels, reduction, rng)
        self.feat_s = _FeatureNet(feature_channels, reduction, rng)
        self.derb = _Derb(feature_channels, reduction, rng)
        self.tail = Conv2d(feature_channels, 3, 3, rng)

    # -- forward pieces (tensor in, tensor out) --

    def streaks(self, detail: Tensor) -> Tensor:
        return self.streak_net(detail)

    def restore(self, image: Tensor, s_hat: Tensor, cfg: PipelineConfig) -> Tensor:
        """Unclamped restored image from the rainy input and the predicted
        streak map."""
        if cfg.use_feature_net:
            latent = self.feat_i(self.head(image)) - self.feat_s(self.head(s_hat))
        else:
            latent = self.head(image - s_hat)
        if cfg.use_derb:
            latent = self.derb(latent)
        return self.tail(latent)

    def forward_pair(self, image: Tensor, detail: Tensor, cfg: PipelineConfig) -> Tensor:
        return self.restore(image, self.streaks(detail), cfg)

    # -- checkpointing --

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            if name not in arrays:
                raise ValueError(f"checkpoint missing parameter {name}")
            if arrays[name].shape != p.data.shape:
                raise ValueError(
                    f"checkpoint/architecture mismatch at {name}: "
                    f"{arrays[name].shape} vs {p.data.shape}"
                )
            p.data[...] = arrays[name]


def _to_tensor(img: np.ndarray) -> Tensor:
    """(H, W, 3) image -> (1, 3, H, W) tensor."""
    if img.ndim == 2:
        img = np.repeat(img[..., None], 3, axis=2)
    return Tensor(img.transpose(2, 0, 1)[None])


def _to_image(t: np.ndarray) -> np.ndarray:
    return t[0].transpose(1, 2, 0)


def _detail_layer(img: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    if not cfg.use_iwgif:
        return img if img.ndim == 3 else np.repeat(img[..., None], 3, axis=2)
    _, detail = decompose(img, cfg.filter_params)
    return detail if detail.ndim == 3 else np.repeat(detail[..., None], 3, axis=2)


def extract_streaks(I: np.ndarray, model: DerainModel, cfg: PipelineConfig) -> np.ndarray:
    """Predicted signed streak map of a single image."""
    I = validate_image(I, "I")
    s = model.streaks(_to_tensor(_detail_layer(I, cfg)))
    return _to_image(s.data)


def derain(I: np.ndarray, model: DerainModel, cfg: PipelineConfig) -> np.ndarray:
    """Restored, clamped image for a single rainy input."""
    I = validate_image(I, "I")
    x = _to_tensor(I)
    pred = model.forward_pair(x, _to_tensor(_detail_layer(I, cfg)), cfg)
    return np.clip(_to_image(pred.data), 0.0, 1.0)


def train(
    dataset: list[PairedSample], cfg: PipelineConfig, model: DerainModel | None = None
) -> tuple[DerainModel, list[tuple[int, float, float]]]:
    """Seeded training loop; returns the model and the (step, lr, loss)
    trace. Fully deterministic for a fixed seed."""
    if not dataset:
        raise ValueError("empty dataset")
    tc = cfg.train
    if model is None:
        model = DerainModel(cfg.feature_channels, cfg.reduction, seed=tc.seed)
    rng = np.random.default_rng(tc.seed + 1)
    opt = Adam(model.parameters(), lr=tc.lr_max)
    trace: list[tuple[int, float, float]] = []
    for step in range(tc.total_steps):
        idx = rng.integers(0, len(dataset), size=tc.batch)
        rainy, clean, details = [], [], []
        for i in idx:
            crop = random_crop(dataset[int(i)], tc.crop, rng)
            r = crop.rainy if crop.rainy.ndim == 3 else np.repeat(crop.rainy[..., None], 3, axis=2)
            c = crop.clean if crop.clean.ndim == 3 else np.repeat(crop.clean[..., None], 3, axis=2)
            rainy.append(r.transpose(2, 0, 1))
            clean.append(c.transpose(2, 0, 1))
            details.append(_detail_layer(r, cfg).transpose(2, 0, 1))
        x = Tensor(np.stack(rainy))
        target = Tensor(np.stack(clean))
        d = Tensor(np.stack(details))
        pred = model.forward_pair(x, d, cfg)
        loss = l1_loss(pred, target)
        model.zero_grad()
        loss.backward()
        lr = cosine_lr(step, max(tc.total_steps, 1), tc.lr_max, tc.lr_min)
        opt.step(lr=lr)
        trace.append((step, lr, float(loss.data)))
    return model, trace


def evaluate(
    dataset: list[PairedSample], model: DerainModel, cfg: PipelineConfig
) -> MetricReport:
    """Full-image PSNR/SSIM of the restored outputs against the clean
    ground truth (no cropping)."""
    report = MetricReport()
    for sample in dataset:
        restored = derain(sample.rainy, model, cfg)
        clean = sample.clean
        if clean.ndim == 2:
            clean = np.repeat(clean[..., None], 3, axis=2)
        report.add(sample.name, psnr(restored, clean), ssim(restored, clean))
    return report


def save_model(path, model: DerainModel, cfg: PipelineConfig, opt: Adam | None = None) -> None:
    header = {
        ARCH_KEY: 1,
        "feature_channels": model.feature_channels,
        "reduction": model.reduction,
        "use_iwgif": cfg.use_iwgif,
        "use_feature_net": cfg.use_feature_net,
        "use_derb": cfg.use_derb,
        "filter_params": asdict(cfg.filter_params),
        "opt_step": opt.state.step if opt is not None else 0,
    }
    arrays = dict(model.state_arrays())
    if opt is not None and opt.state.m:
        for i, (m, v) in enumerate(zip(opt.state.m, opt.state.v)):
            arrays[f"opt.m.{i}"] = m
            arrays[f"opt.v.{i}"] = v
    save_checkpoint(path, header, arrays)


def load_model(path) -> tuple[DerainModel, PipelineConfig]:
    header, arrays = load_checkpoint(path)
    cfg = PipelineConfig(
        feature_channels=int(header["feature_channels"]),
        reduction=int(header["reduction"]),
        use_iwgif=bool(header["use_iwgif"]),
        use_feature_net=bool(header["use_feature_net"]),
        use_derb=bool(header["use_derb"]),
        filter_params=FilterParams(**header["filter_params"]),
    )
    model = DerainModel(cfg.feature_channels, cfg.reduction)
    model.load_state_arrays(
        {k: v for k, v in arrays.items() if not k.startswith("opt.")}
    )
    return model, cfg
