from dataclasses import replace

from hsifc.band_select import greedy_band_selection, write_band_list
from hsifc.exceptions import ConfigError
from hsifc.model_io import save_model
from hsifc.sampling import stratified_split
from hsifc.services import ExperimentService, derive_seeds

from ._base import HsifcCommand


class Command(HsifcCommand):
    help = "Sélectionne k bandes par divergence sur la partition d'entraînement ; --retrain relance le pipeline"

    def add_arguments(self, parser):
        self.add_run_arguments(parser)
        parser.add_argument('--k', dest='band_k', type=int, help="Nombre de bandes à retenir")
        parser.add_argument('--retrain', action='store_true')

    def run(self, **options):
        config = self.run_config(options, band_k=options.get('band_k'))
        if not config.band_k:
            raise ConfigError("--k est requis (ou band_k dans la configuration)")
        out_dir = config.output_dir('bands')

        ds, descriptor, _ = ExperimentService.load_dataset(config)
        if config.band_k > ds.bands:
            raise ConfigError(f"--k {config.band_k} dépasse le nombre de bandes ({ds.bands})")

        # Même découpage que le pipeline pour cette graine : le test n'est jamais vu
        split = stratified_split(ds, config.test_fraction, derive_seeds(config.seed)['split'])
        bands = greedy_band_selection(split.train, config.band_k)
        bands_path = write_band_list(bands, out_dir / 'bands.txt')
        self.success(f"{len(bands)} bandes retenues : {bands_path}")

        if options.get('retrain'):
            retrain_config = replace(config, bands=bands, band_k=None)
            result = ExperimentService.run_pipeline(ds, retrain_config, config.seed, descriptor)
            save_model(result.network, result.stats, out_dir / 'model.hsm1')
            report_path = ExperimentService.write_json_report(
                {
                    'command': 'bands',
                    'config': retrain_config.to_dict(),
                    'dataset': descriptor.as_dict() if descriptor else None,
                    **result.to_dict(),
                },
                out_dir / 'report.json',
            )
            self.success(f"Réentraînement sur {len(bands)} bandes : OA {result.metrics.oa:.2f} %, AA {result.metrics.aa:.2f} %")
            self.success(f"Rapport : {report_path}")
