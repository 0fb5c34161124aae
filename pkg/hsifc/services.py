"""
Services de haut niveau : chargement des données selon la configuration,
exécution d'une répétition du protocole et des séries de répétitions.
"""

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from django.conf import settings

from .band_select import greedy_band_selection, project_bands
from .data import BandStats, PixelDataset, apply_standardization, extract_labeled_pixels, fit_band_stats, load_csv_dataset
from .datasets import DatasetDescriptor, dataset_descriptor, dataset_paths
from .envi import load_envi_cube, load_label_raster
from .evaluation import ExperimentSummary, MetricsReport, metrics_report
from .exceptions import ConfigError, DataFormatError, ExperimentError, HsifcError
from .network import Network, NetworkSpec, init_network, parameter_count, predict
from .optim import TrainConfig
from .sampling import BalancePlan, balance_by_duplication, leakage_overlap, plan_balance, stratified_split
from .training import TrainReport, train

logger = logging.getLogger(__name__)

BALANCE_ORDERS = ('post_split', 'pre_split_unsafe')


@dataclass
class RunConfig:
    """Configuration complète d'une exécution (fichier JSON + flags)"""
    dataset: Optional[str] = None
    cube: Optional[str] = None
    gt: Optional[str] = None
    csv: Optional[str] = None
    data_dir: Optional[str] = None
    test_fraction: float = field(default_factory=lambda: settings.HSIFC_TEST_FRACTION)
    balance: bool = True
    balance_order: str = 'post_split'
    i_understand_leakage: bool = False
    hidden_sizes: Optional[List[int]] = None
    epochs: int = field(default_factory=lambda: settings.HSIFC_EPOCHS)
    batch_size: int = field(default_factory=lambda: settings.HSIFC_BATCH_SIZE)
    learning_rate: float = field(default_factory=lambda: settings.HSIFC_LEARNING_RATE)
    bands: Optional[List[int]] = None
    band_k: Optional[int] = None
    seed: int = field(default_factory=lambda: settings.HSIFC_SEED)
    repeats: int = 30
    out: Optional[str] = None

    def __post_init__(self):
        if self.balance_order not in BALANCE_ORDERS:
            raise ConfigError(f"balance_order inconnu : {self.balance_order}")
        if self.balance_order == 'pre_split_unsafe' and not self.i_understand_leakage:
            raise ConfigError(
                "pre_split_unsafe duplique des pixels de test dans l'entraînement : "
                "ajoutez --i-understand-leakage pour le confirmer"
            )

    def to_dict(self):
        return asdict(self)

    def output_dir(self, command):
        return Path(self.out) if self.out else Path(settings.HSIFC_OUTPUT_DIR) / command


def derive_seeds(seed: int) -> Dict[str, int]:
    """Graines indépendantes (découpage, équilibrage, init, mélange) dérivées d'une seule"""
    split, balance, init, shuffle = np.random.SeedSequence(seed).generate_state(4)
    return {'split': int(split), 'balance': int(balance), 'init': int(init), 'shuffle': int(shuffle)}


@dataclass
class PipelineResult:
    seed: int
    seeds: Dict[str, int]
    network: Network
    stats: BandStats
    metrics: MetricsReport
    train_report: TrainReport
    leakage_overlap: int
    train_size: int
    test_size: int
    bands: Optional[List[int]] = None
    balance_plan: Optional[BalancePlan] = None
    seconds: float = 0.0

    def to_dict(self):
        return {
            'seed': self.seed,
            'seeds': dict(self.seeds),
            'architecture': list(self.network.spec.layer_dims),
            'parameter_count': parameter_count(self.network.spec),
            'bands': list(self.bands) if self.bands is not None else None,
            'train_size': self.train_size,
            'test_size': self.test_size,
            'balance_plan': self.balance_plan.as_dict() if self.balance_plan else None,
            'leakage_overlap': self.leakage_overlap,
            'metrics': self.metrics.to_dict(),
            'train_report': self.train_report.as_dict(),
        }


class ExperimentService:
    """
    Service d'orchestration du protocole : découpage -> [sélection de bandes]
    -> équilibrage -> standardisation -> entraînement -> prédiction -> métriques
    """

    @staticmethod
    def resolve_hidden_sizes(config: RunConfig, descriptor: Optional[DatasetDescriptor]):
        if config.hidden_sizes:
            return list(config.hidden_sizes)
        if descriptor is not None:
            return list(descriptor.hidden_sizes)
        return list(settings.HSIFC_DEFAULT_HIDDEN)

    @staticmethod
    def load_dataset(config: RunConfig):
        """
        Charge les enregistrements étiquetés.

        Returns:
            (PixelDataset, DatasetDescriptor ou None, LabelRaster ou None)
        """
        descriptor = dataset_descriptor(config.dataset) if config.dataset else None
        gt = None

        if config.csv:
            path = Path(config.csv)
            if not path.exists():
                raise FileNotFoundError(f"Fichier CSV introuvable : {path}")
            ds = load_csv_dataset(path, num_classes=descriptor.num_classes if descriptor else None)
        else:
            if config.cube and config.gt:
                cube_path, gt_path = Path(config.cube), Path(config.gt)
            elif descriptor is not None:
                cube_path, gt_path = dataset_paths(descriptor.name, config.data_dir)
            else:
                raise ConfigError("Aucune source de données : indiquez --dataset, --cube/--gt ou --csv")
            for path in (cube_path, gt_path):
                if not path.exists():
                    raise FileNotFoundError(f"Fichier introuvable : {path}")
            gt = load_label_raster(gt_path)
            ds = extract_labeled_pixels(load_envi_cube(cube_path), gt)

        if descriptor is not None:
            if ds.num_classes > descriptor.num_classes:
                raise DataFormatError(
                    f"{ds.num_classes} classes trouvées, {descriptor.num_classes} attendues pour {descriptor.name}"
                )
            if ds.bands != descriptor.bands:
                logger.warning("%s : %d bandes lues, %d enregistrées", descriptor.name, ds.bands, descriptor.bands)
            ds = PixelDataset(ds.signatures, ds.labels, ds.pixel_index, descriptor.num_classes)

        logger.info("Jeu chargé : %d enregistrements, %d bandes, %d classes", len(ds), ds.bands, ds.num_classes)
        return ds, descriptor, gt

    @staticmethod
    def run_pipeline(ds: PixelDataset, config: RunConfig, seed: int,
                     descriptor: Optional[DatasetDescriptor] = None) -> PipelineResult:
        """Une répétition complète, entièrement déterminée par `seed`"""
        started = time.perf_counter()
        seeds = derive_seeds(seed)
        plan = None

        if config.balance and config.balance_order == 'pre_split_unsafe':
            # Démonstration de la fuite : les copies sont créées avant le découpage
            logger.warning("Équilibrage AVANT découpage : des copies de pixels de test sont en entraînement")
            plan = plan_balance(ds)
            split = stratified_split(balance_by_duplication(ds, seeds['balance']), config.test_fraction, seeds['split'])
            train_part, test_part = split.train, split.test
        else:
            split = stratified_split(ds, config.test_fraction, seeds['split'])
            train_part, test_part = split.train, split.test

        bands = list(config.bands) if config.bands else None
        if bands is None and config.band_k:
            bands = greedy_band_selection(train_part, config.band_k)
        if bands is not None:
            train_part = project_bands(train_part, bands)
            test_part = project_bands(test_part, bands)

        if config.balance and config.balance_order == 'post_split':
            plan = plan_balance(train_part)
            train_part = balance_by_duplication(train_part, seeds['balance'])

        stats = fit_band_stats(train_part)
        train_std = apply_standardization(train_part, stats)
        test_std = apply_standardization(test_part, stats)

        spec = NetworkSpec(
            input_size=train_std.bands,
            hidden_sizes=ExperimentService.resolve_hidden_sizes(config, descriptor),
            output_size=ds.num_classes,
        )
        net = init_network(spec, seeds['init'])
        cfg = TrainConfig(
            epochs=config.epochs,
            batch_size=config.batch_size,
            learning_rate=config.learning_rate,
            shuffle_seed=seeds['shuffle'],
        )
        net, report = train(net, train_std, cfg)

        predictions = predict(net, test_std)
        metrics = metrics_report(
            test_std.labels, predictions, ds.num_classes,
            class_names=list(descriptor.class_names) if descriptor else None,
        )
        overlap = leakage_overlap(train_part, test_part)
        if overlap:
            logger.warning("Fuite détectée : %d paires entraînement/test partagent un pixel", overlap)

        result = PipelineResult(
            seed=seed,
            seeds=seeds,
            network=net,
            stats=stats,
            metrics=metrics,
            train_report=report,
            leakage_overlap=overlap,
            train_size=len(train_part),
            test_size=len(test_part),
            bands=bands,
            balance_plan=plan,
            seconds=time.perf_counter() - started,
        )
        logger.info("Graine %d : OA %.2f %%, AA %.2f %% (%.1f s)", seed, metrics.oa, metrics.aa, result.seconds)
        return result

    @staticmethod
    def run_experiments(config: RunConfig, repeats: int, base_seed: int, dataset=None) -> ExperimentSummary:
        """
        `repeats` répétitions, la répétition r utilisant la graine base_seed + r.
        `dataset` = (PixelDataset, descriptor) déjà chargé, sinon lu depuis la config.
        """
        if repeats < 1:
            raise ConfigError(f"repeats doit être au moins 1, reçu {repeats}")
        if dataset is None:
            ds, descriptor, _ = ExperimentService.load_dataset(config)
        else:
            ds, descriptor = dataset

        summary = ExperimentSummary()
        for r in range(repeats):
            seed = base_seed + r
            try:
                result = ExperimentService.run_pipeline(ds, config, seed, descriptor)
            except HsifcError as e:
                raise ExperimentError(str(e), r, cause=e) from e
            except Exception as e:
                raise ExperimentError(f"{type(e).__name__}: {e}", r, cause=e) from e
            summary.add(seed, result.metrics)
            logger.info("Répétition %d/%d terminée", r + 1, repeats)

        logger.info(
            "%d répétitions : OA %.2f ± %.2f, AA %.2f ± %.2f",
            summary.repeats, summary.mean_oa, summary.std_oa, summary.mean_aa, summary.std_aa,
        )
        return summary

    @staticmethod
    def write_json_report(payload, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, ensure_ascii=False)
            f.write('\n')
        return path
