from django.conf import settings

from hsifc.datasets import dataset_available, dataset_descriptor
from hsifc.exceptions import ConfigError
from hsifc.network import NetworkSpec, parameter_count
from hsifc.sampling import holdout_count
from hsifc.services import ExperimentService

from ._base import HsifcCommand


class Command(HsifcCommand):
    help = "Affiche bandes, classes, effectifs et architecture d'un jeu de données"

    def add_arguments(self, parser):
        self.add_source_arguments(parser)
        parser.add_argument('--test-fraction', dest='test_fraction', type=float)

    def run(self, **options):
        if options.get('dataset') and not (options.get('cube') or options.get('csv') or options.get('config')):
            self.describe_registered(options['dataset'], options.get('data_dir'), options.get('test_fraction'))
            return

        config = self.run_config(options)
        ds, descriptor, _ = ExperimentService.load_dataset(config)
        names = descriptor.class_names if descriptor else [f'classe {c}' for c in range(1, ds.num_classes + 1)]
        hidden = ExperimentService.resolve_hidden_sizes(config, descriptor)

        self.stdout.write(f"📊 {len(ds)} pixels étiquetés")
        self.stdout.write(f"   Bandes : {ds.bands}")
        self.stdout.write(f"   Classes : {ds.num_classes}")
        self.stdout.write(f"   Couches cachées : {hidden}")
        self.write_counts(names, ds.class_counts().tolist(), config.test_fraction)

    def describe_registered(self, name, data_dir, test_fraction):
        descriptor = dataset_descriptor(name)
        fraction = settings.HSIFC_TEST_FRACTION if test_fraction is None else test_fraction
        if not 0 < fraction < 1:
            raise ConfigError(f"--test-fraction doit être dans ]0, 1[, reçu {fraction}")
        spec = NetworkSpec(descriptor.bands, descriptor.hidden_sizes, descriptor.num_classes)

        self.stdout.write(f"📊 {descriptor.title} ({descriptor.name})")
        self.stdout.write(f"   Bandes : {descriptor.bands}")
        self.stdout.write(f"   Classes : {descriptor.num_classes}")
        self.stdout.write(f"   Couches cachées : {list(descriptor.hidden_sizes)}")
        self.stdout.write(f"   Paramètres entraînables : {parameter_count(spec)}")
        self.stdout.write(f"   Référence : OA {descriptor.reference_oa} %, AA {descriptor.reference_aa} %")
        self.write_counts(descriptor.class_names, descriptor.class_counts, fraction)

        if dataset_available(descriptor.name, data_dir):
            self.success("Fichiers présents")
        else:
            self.warning("Fichiers absents de la racine des données")

    def write_counts(self, names, counts, fraction):
        self.stdout.write("")
        self.stdout.write(f"   {'#':>3}  {'classe':<32} {'total':>7} {'test':>7} {'train':>7}")
        for c, (name, count) in enumerate(zip(names, counts), start=1):
            test = holdout_count(count, fraction)
            self.stdout.write(f"   {c:>3}  {name:<32} {count:>7} {test:>7} {count - test:>7}")
        self.stdout.write(f"   {'':>3}  {'total':<32} {sum(counts):>7}")
