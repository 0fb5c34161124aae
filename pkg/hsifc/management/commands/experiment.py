from hsifc.services import ExperimentService

from ._base import HsifcCommand


class Command(HsifcCommand):
    help = "Répète le protocole N fois (graines seed, seed+1, ...) et écrit summary.json"

    def add_arguments(self, parser):
        self.add_run_arguments(parser)
        parser.add_argument('--repeats', type=int, help="Nombre de répétitions (défaut 30)")
        parser.add_argument('--k', dest='band_k', type=int)

    def run(self, **options):
        config = self.run_config(options, repeats=options.get('repeats'), band_k=options.get('band_k'))
        out_dir = config.output_dir('experiment')

        ds, descriptor, _ = ExperimentService.load_dataset(config)
        self.stdout.write(f"🔄 {config.repeats} répétitions à partir de la graine {config.seed}...")
        summary = ExperimentService.run_experiments(config, config.repeats, config.seed, dataset=(ds, descriptor))

        path = ExperimentService.write_json_report(
            {
                'command': 'experiment',
                'config': config.to_dict(),
                'dataset': descriptor.as_dict() if descriptor else None,
                **summary.to_dict(),
            },
            out_dir / 'summary.json',
        )
        self.success(f"OA {summary.mean_oa:.2f} ± {summary.std_oa:.2f} %, AA {summary.mean_aa:.2f} ± {summary.std_aa:.2f} %")
        if descriptor is not None:
            self.stdout.write(f"   Référence : OA {descriptor.reference_oa} %, AA {descriptor.reference_aa} %")
        self.success(f"Résumé : {path}")
