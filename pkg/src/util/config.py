import os
from dotenv import load_dotenv

load_dotenv()

class Config:

    DATA_DIR = os.getenv('FUSELAB_DATA_DIR', os.path.join('data', 'mnist'))
    DB_PATH = os.getenv('FUSELAB_DB_PATH', 'fuselab_results.duckdb')
    RESULTS_DIR = os.getenv('FUSELAB_RESULTS_DIR', 'results')
    LOG_DIR = os.getenv('FUSELAB_LOG_DIR', 'logs')

    MAX_RETRIES = int(os.getenv('FUSELAB_MAX_RETRIES', '3'))
    RETRY_DELAY = float(os.getenv('FUSELAB_RETRY_DELAY', '5'))

    MAX_WORKERS = int(os.getenv('FUSELAB_MAX_WORKERS', '4'))

    MNIST_MIRROR = os.getenv('FUSELAB_MNIST_MIRROR', 'https://ossci-datasets.s3.amazonaws.com/mnist')
    MNIST_FILES = {
        'train_images': 'train-images-idx3-ubyte.gz',
        'train_labels': 'train-labels-idx1-ubyte.gz',
        'test_images': 't10k-images-idx3-ubyte.gz',
        'test_labels': 't10k-labels-idx1-ubyte.gz'
    }

    # MNIST MLP recipe: Adam, lr 0.001 decayed by 0.8 every 2 epochs
    MNIST_TRAIN = {
        'learning_rate': 0.001,
        'decay_factor': 0.8,
        'decay_period_epochs': 2,
        'batch_size': 64,
        'epochs': 40,
        'l1_coefficient': 1e-7
    }

    # one-neuron nets of the 2D demo, trained full batch
    DEMO_TRAIN = {
        'learning_rate': 0.5,
        'decay_factor': 1.0,
        'decay_period_epochs': 1,
        'batch_size': 300,
        'epochs': 600,
        'l1_coefficient': 0.0
    }
    DEMO_HIDDEN_WIDTH = 1
    DEMO_N_TRAIN = 300
    DEMO_N_TEST = 150
    DEMO_SUCCESS_ACCURACY = 0.90

    HIDDEN_WIDTH = 100
    LEAKY_SLOPE = 0.01

    PARTITION_MAX_RETRIES = 1000
    TRIAL_SEED_STRIDE = 1000

    CONFIDENCE_LABELS = (0, 1, 2, 5, 9)
    # hetero_dir grid plus a near-IID control point
    SWEEP_ALPHAS = (5e-4, 1e-2, 0.1, 0.5, 1.0, 1e6)
    EXPORT_SAMPLES = int(os.getenv('FUSELAB_EXPORT_SAMPLES', '100'))
