from pathlib import Path

from django.conf import settings

from hsifc.band_select import project_bands, read_band_list
from hsifc.data import apply_standardization, extract_labeled_pixels
from hsifc.datasets import dataset_paths
from hsifc.envi import load_envi_cube, load_label_raster
from hsifc.evaluation import render_map
from hsifc.exceptions import ConfigError, NetworkError
from hsifc.model_io import load_model
from hsifc.network import predict

from ._base import HsifcCommand


class Command(HsifcCommand):
    help = "Classe tous les pixels étiquetés avec un modèle HSM1 et écrit une carte PPM"

    def add_arguments(self, parser):
        parser.add_argument('--model', required=True, help="Fichier modèle .hsm1")
        parser.add_argument('--dataset')
        parser.add_argument('--data-dir', dest='data_dir')
        parser.add_argument('--cube')
        parser.add_argument('--gt')
        parser.add_argument('--bands', dest='bands_file', help="Liste de bandes utilisée à l'entraînement")
        parser.add_argument('--out', help="Image de sortie (défaut : HSIFC_OUTPUT_DIR/map/map.ppm)")

    def run(self, **options):
        if options.get('cube') and options.get('gt'):
            cube_path, gt_path = Path(options['cube']), Path(options['gt'])
        elif options.get('dataset'):
            cube_path, gt_path = dataset_paths(options['dataset'], options.get('data_dir'))
        else:
            raise ConfigError("Indiquez --cube et --gt, ou --dataset")
        for path in (cube_path, gt_path):
            if not path.exists():
                raise FileNotFoundError(f"Fichier introuvable : {path}")

        net, stats = load_model(options['model'])
        gt = load_label_raster(gt_path)
        ds = extract_labeled_pixels(load_envi_cube(cube_path), gt)
        if options.get('bands_file'):
            ds = project_bands(ds, read_band_list(options['bands_file']))
        if ds.bands != net.spec.input_size:
            raise NetworkError(f"Le modèle attend {net.spec.input_size} bandes, le cube en fournit {ds.bands}")

        labels = predict(net, apply_standardization(ds, stats))
        predictions = dict(zip(ds.pixel_index.tolist(), labels.tolist()))

        out = Path(options['out']) if options.get('out') else Path(settings.HSIFC_OUTPUT_DIR) / 'map' / 'map.ppm'
        render_map(gt, predictions, out)
        self.success(f"Carte : {out} ({gt.samples} x {gt.lines})")
