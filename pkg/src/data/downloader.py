import os
import time
from datetime import datetime

import requests

from src.error_handling.error_handling import ErrorCode, IngestionError
from src.logging.logger import setup_logger
from src.util.config import Config


class MnistDownloader:
    def __init__(self, db=None, data_dir=None, mirror=None, session=None):
        self.logger = setup_logger()
        self.db = db
        self.data_dir = data_dir or Config.DATA_DIR
        self.mirror = (mirror or Config.MNIST_MIRROR).rstrip('/')
        self.session = session or requests.Session()

    def make_request(self, url, max_retries=None):
        if max_retries is None:
            max_retries = Config.MAX_RETRIES

        retry_count = 0
        while retry_count <= max_retries:
            start_time = datetime.now()
            if retry_count > 0:
                self.logger.info(f"Retry attempt {retry_count} for {url}")
            try:
                response = self.session.get(url, timeout=60)
                end_time = datetime.now()
                error_message = None if response.status_code == 200 else f"HTTP {response.status_code}"
                self._log(url, start_time, end_time, response.status_code, error_message)
                if response.status_code == 200:
                    return response.content
                self.logger.error(f"Download of {url} failed with status code {response.status_code}")
            except requests.RequestException as e:
                self._log(url, start_time, datetime.now(), 0, str(e))
                self.logger.error(f"Request error for {url}: {str(e)}")

            retry_count += 1
            if retry_count <= max_retries:
                time.sleep(Config.RETRY_DELAY)

        raise IngestionError(f"Giving up on {url} after {max_retries + 1} attempts",
                             code=ErrorCode.DOWNLOAD_FAILED, details={"url": url})

    def fetch_all(self, overwrite=False):
        os.makedirs(self.data_dir, exist_ok=True)
        paths = {}
        for key, name in Config.MNIST_FILES.items():
            path = os.path.join(self.data_dir, name)
            if os.path.exists(path) and not overwrite:
                self.logger.info(f"{path} already present, skipping")
            else:
                content = self.make_request(f"{self.mirror}/{name}")
                with open(path, 'wb') as f:
                    f.write(content)
                self.logger.info(f"Saved {len(content)} bytes to {path}")
            paths[key] = path
        return paths

    def _log(self, url, start_time, end_time, status_code, error_message):
        if self.db:
            self.db.log_download(url, start_time, end_time, status_code, error_message)
