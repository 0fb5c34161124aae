from hsifc.band_select import write_band_list
from hsifc.model_io import save_model
from hsifc.services import ExperimentService

from ._base import HsifcCommand


class Command(HsifcCommand):
    help = "Découpe, équilibre, standardise, entraîne puis évalue ; écrit model.hsm1 et report.json"

    def add_arguments(self, parser):
        self.add_run_arguments(parser)
        parser.add_argument('--k', dest='band_k', type=int, help="Sélection gloutonne de k bandes avant entraînement")

    def run(self, **options):
        config = self.run_config(options, band_k=options.get('band_k'))
        out_dir = config.output_dir('train')

        ds, descriptor, _ = ExperimentService.load_dataset(config)
        result = ExperimentService.run_pipeline(ds, config, config.seed, descriptor)

        model_path = save_model(result.network, result.stats, out_dir / 'model.hsm1')
        if result.bands is not None:
            write_band_list(result.bands, out_dir / 'bands.txt')
        report_path = ExperimentService.write_json_report(
            {
                'command': 'train',
                'config': config.to_dict(),
                'dataset': descriptor.as_dict() if descriptor else None,
                **result.to_dict(),
            },
            out_dir / 'report.json',
        )

        if result.leakage_overlap:
            self.warning(f"leakage_overlap = {result.leakage_overlap} : le test n'est pas indépendant")
        self.success(f"OA {result.metrics.oa:.2f} %, AA {result.metrics.aa:.2f} %")
        self.success(f"Modèle : {model_path}")
        self.success(f"Rapport : {report_path}")
